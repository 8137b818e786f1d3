// Command-line front end for the dppmb shared library. Everything that
// touches the model goes through the C API in dppmb.h; this file only adds
// argument handling and the SVG renderer for the plot subcommand.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dppmb.h"

namespace {

int fail_runtime(dppmb_status status) {
  std::cerr << "error: " << dppmb_last_error() << " (status " << status << ")\n";
  return 1;
}

// ---- plot: CSV in, SVG line chart out ----------------------------------

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

bool read_csv_column(const std::string& path, const std::string& want_col,
                     Series& out, std::string& used_col) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot open " << path << "\n";
    return false;
  }
  std::string header;
  if (!std::getline(in, header)) {
    std::cerr << "error: " << path << " is empty\n";
    return false;
  }
  std::vector<std::string> cols;
  {
    std::stringstream ss(header);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
  }
  if (cols.size() < 2) {
    std::cerr << "error: " << path << " needs at least two columns\n";
    return false;
  }
  size_t ycol = 1;
  if (!want_col.empty()) {
    const auto it = std::find(cols.begin(), cols.end(), want_col);
    if (it == cols.end()) {
      std::cerr << "error: " << path << " has no column '" << want_col << "'\n";
      return false;
    }
    ycol = static_cast<size_t>(it - cols.begin());
  }
  used_col = cols[ycol];

  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() <= ycol) continue;
    try {
      const double xv = std::stod(fields[0]);
      const double yv = std::stod(fields[ycol]);
      out.x.push_back(xv);
      out.y.push_back(yv);
    } catch (const std::exception&) {
      std::cerr << "error: non-numeric row in " << path << ": " << line << "\n";
      return false;
    }
  }
  return true;
}

std::string format_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

int write_svg(const std::string& path, const std::vector<Series>& series,
              const std::string& x_label, const std::string& y_label) {
  constexpr double kWidth = 860, kHeight = 480;
  constexpr double kLeft = 70, kRight = 180, kTop = 30, kBottom = 50;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool first = true;
  for (const auto& s : series)
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        xmin = xmax = s.x[i];
        ymin = ymax = s.y[i];
        first = false;
      }
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  ymin = std::min(ymin, 0.0);

  const auto sx = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * plot_w; };
  const auto sy = [&](double y) {
    return kTop + plot_h - (y - ymin) / (ymax - ymin) * plot_h;
  };

  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                   "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
      << kHeight << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (int t = 0; t <= 5; ++t) {
    const double fx = xmin + (xmax - xmin) * t / 5.0;
    const double fy = ymin + (ymax - ymin) * t / 5.0;
    svg << "<line x1=\"" << sx(fx) << "\" y1=\"" << kTop + plot_h << "\" x2=\""
        << sx(fx) << "\" y2=\"" << kTop + plot_h + 5 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << sx(fx) << "\" y=\"" << kTop + plot_h + 20
        << "\" font-size=\"11\" text-anchor=\"middle\">" << format_tick(fx)
        << "</text>\n";
    svg << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << sy(fy) << "\" x2=\""
        << kLeft << "\" y2=\"" << sy(fy) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << sy(fy) + 4
        << "\" font-size=\"11\" text-anchor=\"end\">" << format_tick(fy)
        << "</text>\n";
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << sy(fy) << "\" x2=\""
        << kLeft + plot_w << "\" y2=\"" << sy(fy)
        << "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
  }
  svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w
      << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
    svg << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < series[s].x.size(); ++i) {
      if (i) svg << ' ';
      svg << sx(series[s].x[i]) << ',' << sy(series[s].y[i]);
    }
    svg << "\"/>\n";
    const double ly = kTop + 16 + 18 * static_cast<double>(s);
    svg << "<line x1=\"" << kLeft + plot_w + 10 << "\" y1=\"" << ly << "\" x2=\""
        << kLeft + plot_w + 34 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << kLeft + plot_w + 40 << "\" y=\"" << ly + 4
        << "\" font-size=\"12\">" << series[s].label << "</text>\n";
  }

  svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
      << "\" font-size=\"13\" text-anchor=\"middle\">" << x_label << "</text>\n";
  svg << "<text x=\"18\" y=\"" << kTop + plot_h / 2
      << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << kTop + plot_h / 2 << ")\">" << y_label << "</text>\n";
  svg << "</svg>\n";

  std::ofstream out(path);
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    return 1;
  }
  out << svg.str();
  return 0;
}

std::string basename_of(const std::string& path) {
  const auto slash = path.find_last_of("/\\");
  std::string name = (slash == std::string::npos) ? path : path.substr(slash + 1);
  const auto dot = name.rfind('.');
  if (dot != std::string::npos) name.erase(dot);
  return name;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"diverse mini-batch selection for sequence-design RL"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(dppmb_version()));

  // run ------------------------------------------------------------------
  auto* run = app.add_subcommand("run", "run a generative experiment");
  std::string run_config, run_profile, run_out_dir, run_variant, run_shaping;
  std::string run_budget, run_prior, run_oracle, run_seed;
  std::vector<std::string> run_sets;
  run->add_option("--config", run_config, "config file with key = value lines");
  run->add_option("--profile", run_profile, "settings bundle: full or desk (desk: B=160 k=16 G=300 horizon=48 alpha=0.06)");
  run->add_option("--seed", run_seed, "run seed");
  run->add_option("--out-dir", run_out_dir, "output directory");
  run->add_option("--variant", run_variant,
                  "standalone, dpp-t, dpp-a, dpp-p or dpp-d");
  run->add_option("--shaping", run_shaping, "none, ims or tanhrnd");
  run->add_option("--budget-mode", run_budget, "strict or all-scored");
  run->add_option("--prior-file", run_prior, "pretrained policy file");
  run->add_option("--oracle-file", run_oracle, "oracle spec file");
  run->add_option("--set", run_sets, "extra key=value overrides")
      ->type_name("KEY=VALUE");

  // sample ---------------------------------------------------------------
  auto* sample = app.add_subcommand("sample", "draw k-DPP subsets from a kernel");
  std::string sm_kernel, sm_fps, sm_out;
  int32_t sm_k = 0;
  uint64_t sm_seed = 0;
  int64_t sm_draws = 1;
  sample->add_option("--kernel", sm_kernel, "kernel dump file (N then N rows)");
  sample->add_option("--fingerprints", sm_fps,
                     "fingerprint file; builds the Tanimoto kernel");
  sample->add_option("--k", sm_k, "subset size")->required();
  sample->add_option("--seed", sm_seed, "sampler seed");
  sample->add_option("--draws", sm_draws, "number of subsets to draw");
  sample->add_option("--out", sm_out, "output file (default stdout)");

  // metrics ----------------------------------------------------------------
  auto* metrics = app.add_subcommand("metrics", "diversity metrics from a memory dump");
  std::string mt_in, mt_out = "metrics.csv", mt_oracle;
  double mt_d = 0.7;
  int64_t mt_every = 250;
  uint64_t mt_seed = 0;
  int32_t mt_reseeds = 1;
  metrics->add_option("--in", mt_in, "memory.csv from a run")->required();
  metrics->add_option("--out", mt_out, "output CSV path");
  metrics->add_option("--threshold-d", mt_d, "diverse-actives distance threshold");
  metrics->add_option("--every", mt_every, "report interval in steps");
  metrics->add_option("--seed", mt_seed, "picker seed");
  metrics->add_option("--reseeds", mt_reseeds, "average the picker over n seeds");
  metrics->add_option("--oracle-file", mt_oracle, "oracle spec file");

  // plot -------------------------------------------------------------------
  auto* plot = app.add_subcommand("plot", "render CSV columns as an SVG chart");
  std::vector<std::string> pl_in, pl_labels;
  std::string pl_out, pl_col;
  plot->add_option("--in", pl_in, "input CSV, one series per file")->required();
  plot->add_option("--out", pl_out, "output SVG path")->required();
  plot->add_option("--col", pl_col, "column to plot (default: second column)");
  plot->add_option("--label", pl_labels, "series labels (default: file names)");

  // make-prior -------------------------------------------------------------
  auto* mkprior = app.add_subcommand("make-prior", "train and save the prior policy");
  std::string mp_out, mp_oracle;
  double mp_smoothing = 0.01;
  mkprior->add_option("--out", mp_out, "output policy file")->required();
  mkprior->add_option("--smoothing", mp_smoothing, "count smoothing");
  mkprior->add_option("--oracle-file", mp_oracle, "oracle spec file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help / --version
      app.exit(e);
      return 0;
    }
    app.exit(e);
    return 2;
  }

  if (run->parsed()) {
    dppmb_config* cfg = nullptr;
    if (auto s = dppmb_config_new(&cfg)) return fail_runtime(s);
    auto set = [&](const char* key, const std::string& value) -> dppmb_status {
      return value.empty() ? DPPMB_OK : dppmb_config_set(cfg, key, value.c_str());
    };
    dppmb_status s = DPPMB_OK;
    if (!run_profile.empty()) s = dppmb_config_profile(cfg, run_profile.c_str());
    if (!s && !run_config.empty()) s = dppmb_config_load(cfg, run_config.c_str());
    for (const auto& kv : run_sets) {
      if (s) break;
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        std::cerr << "error: --set expects key=value, got '" << kv << "'\n";
        dppmb_config_free(cfg);
        return 2;
      }
      s = dppmb_config_set(cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
    }
    if (!s) s = set("seed", run_seed);
    if (!s) s = set("out_dir", run_out_dir);
    if (!s) s = set("variant", run_variant);
    if (!s) s = set("shaping", run_shaping);
    if (!s) s = set("budget_mode", run_budget);
    if (!s) s = set("prior_file", run_prior);
    if (!s) s = set("oracle_file", run_oracle);
    if (!s) s = dppmb_run(cfg);
    dppmb_config_free(cfg);
    return s ? fail_runtime(s) : 0;
  }

  if (sample->parsed()) {
    if (sm_kernel.empty() == sm_fps.empty()) {
      std::cerr << "error: pass exactly one of --kernel or --fingerprints\n";
      return 2;
    }
    dppmb_kernel* kernel = nullptr;
    const dppmb_status ks = sm_kernel.empty()
                                ? dppmb_kernel_from_fingerprints(sm_fps.c_str(), &kernel)
                                : dppmb_kernel_read(sm_kernel.c_str(), &kernel);
    if (ks) return fail_runtime(ks);

    dppmb_sampler* sampler = nullptr;
    if (auto s = dppmb_sampler_new(kernel, sm_k, &sampler)) {
      dppmb_kernel_free(kernel);
      return fail_runtime(s);
    }

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!sm_out.empty()) {
      file.open(sm_out);
      if (!file) {
        std::cerr << "error: cannot write " << sm_out << "\n";
        dppmb_sampler_free(sampler);
        dppmb_kernel_free(kernel);
        return 1;
      }
      out = &file;
    }

    std::vector<int32_t> indices(static_cast<size_t>(sm_k));
    for (int64_t d = 0; d < sm_draws; ++d) {
      if (auto s = dppmb_sampler_draw(sampler, sm_seed,
                                      static_cast<uint64_t>(d), indices.data())) {
        dppmb_sampler_free(sampler);
        dppmb_kernel_free(kernel);
        return fail_runtime(s);
      }
      for (int32_t i = 0; i < sm_k; ++i) {
        if (i) *out << ' ';
        *out << indices[static_cast<size_t>(i)];
      }
      *out << '\n';
    }
    dppmb_sampler_free(sampler);
    dppmb_kernel_free(kernel);
    return 0;
  }

  if (metrics->parsed()) {
    const dppmb_status s = dppmb_metrics_compute(
        mt_in.c_str(), mt_out.c_str(), mt_d, static_cast<int32_t>(mt_every),
        mt_seed, mt_reseeds, mt_oracle.empty() ? nullptr : mt_oracle.c_str());
    return s ? fail_runtime(s) : 0;
  }

  if (plot->parsed()) {
    std::vector<Series> series;
    std::string y_label;
    for (size_t i = 0; i < pl_in.size(); ++i) {
      Series s;
      s.label = i < pl_labels.size() ? pl_labels[i] : basename_of(pl_in[i]);
      std::string used;
      if (!read_csv_column(pl_in[i], pl_col, s, used)) return 1;
      if (y_label.empty()) y_label = used;
      series.push_back(std::move(s));
    }
    return write_svg(pl_out, series, "step", y_label);
  }

  if (mkprior->parsed()) {
    const dppmb_status s = dppmb_make_prior(
        mp_out.c_str(), mp_smoothing, mp_oracle.empty() ? nullptr : mp_oracle.c_str());
    return s ? fail_runtime(s) : 0;
  }

  return 2;
}
