// aks.cpp
//
// Command-line front end: score, select, coverage, objective, oracle, bench,
// plot. Data goes to files or stdout, diagnostics to stderr.
// Exit status: 0 success, 1 runtime error, 2 usage error.
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "aks/aks.hpp"

namespace {

struct SelectArgs {
  std::string scores;
  std::string strategy = "ada";
  std::size_t m = 64;
  int max_level = 5;
  double s_thr = 0.8;
  double lambda = 1.0;
  double fps = 1.0;
  std::string preset = "default";
  std::string out;
};

struct ScoreArgs {
  std::string manifest;
  std::string query;
  std::string scorer = "remote";
  double value = 0.0;
  std::string scores_file;
  std::string url;
  std::string command;
  std::string transport;
  std::size_t batch_size = 32;
  double timeout_s = 30.0;
  int retries = 3;
  std::string planted;
  double noise = 0.0;
  double baseline = 0.0;
  std::uint64_t seed = 0;
  std::string out;
};

// "start:end:height[:shape],..." -> planted intervals
std::vector<aks::PlantedInterval> parse_planted(const std::string& text) {
  std::vector<aks::PlantedInterval> out;
  std::stringstream items(text);
  for (std::string item; std::getline(items, item, ',');) {
    if (item.empty()) continue;
    std::stringstream fields(item);
    std::vector<std::string> parts;
    for (std::string p; std::getline(fields, p, ':');) parts.push_back(p);
    if (parts.size() < 3 || parts.size() > 4) throw aks::Error("bad --planted item '" + item + "'");
    aks::PlantedInterval p;
    p.start = std::stoul(parts[0]);
    p.end = std::stoul(parts[1]);
    p.peak_height = std::stod(parts[2]);
    if (parts.size() == 4) p.shape = aks::parse_shape(parts[3]);
    out.push_back(p);
  }
  return out;
}

void write_or_print(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    aks::detail::write_file(path, content);
  }
}

int run_score(const ScoreArgs& a) {
  const auto manifest = aks::load_manifest(a.manifest);
  aks::ScorerSpec spec;
  if (a.scorer == "constant") {
    spec = aks::ConstantScorer{a.value};
  } else if (a.scorer == "file") {
    if (a.scores_file.empty()) throw aks::Error("--scores-file is required for the file scorer");
    spec = aks::FileScorer{a.scores_file};
  } else if (a.scorer == "synthetic") {
    aks::SyntheticSpec s;
    s.planted = parse_planted(a.planted);
    s.noise_sigma = a.noise;
    s.baseline = a.baseline;
    s.seed = a.seed;
    spec = aks::SyntheticScorer{s};
  } else {
    aks::RemoteScorer r;
    std::string url = a.url;
    if (url.empty())
      if (const char* env = std::getenv("AKS_SCORER_URL")) url = env;
    if (!a.transport.empty()) r.transport = aks::parse_transport(a.transport);
    else r.transport = a.command.empty() && !url.empty() ? aks::Transport::http : aks::Transport::stdio;
    r.endpoint = r.transport == aks::Transport::http ? url : a.command;
    if (r.endpoint.empty())
      throw aks::Error(r.transport == aks::Transport::http ? "--scorer-url (or AKS_SCORER_URL) is required"
                                                           : "--scorer-cmd is required for the stdio transport");
    r.batch_size = a.batch_size;
    r.timeout_s = a.timeout_s;
    r.max_retries = a.retries;
    spec = r;
  }
  const auto series = aks::score_frames(manifest, a.query, spec);
  write_or_print(a.out, aks::render_scores(series, aks::format_for_path(a.out)));
  return 0;
}

int run_select(SelectArgs a, bool level_given, bool thr_given) {
  if (a.preset == "concentrated") {
    if (!level_given) a.max_level = 3;
    if (!thr_given) a.s_thr = 0.2;
  } else if (a.preset != "default") {
    throw aks::Error("unknown preset '" + a.preset + "'");
  }
  const auto series = aks::load_scores(a.scores);
  aks::SelectionParams p{a.m, a.max_level, a.s_thr, a.lambda};
  p.validate();
  const auto strategy = aks::parse_strategy(a.strategy);
  if (strategy == aks::Strategy::ADA || strategy == aks::Strategy::BIN) p.warn_if_unusual();
  const auto sel = aks::select_keyframes(series, strategy, p, a.fps);
  write_or_print(a.out, aks::render_selection(sel, series));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive keyframe sampling: select M keyframes from per-frame relevance scores"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  // score
  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "Score every frame of a manifest for a query");
  score_cmd->add_option("--manifest", score.manifest, "Frame manifest (line-delimited JSON)")->required();
  score_cmd->add_option("--query", score.query, "Query text")->required();
  score_cmd->add_option("--scorer", score.scorer, "remote | constant | file | synthetic")
      ->check(CLI::IsMember({"remote", "constant", "file", "synthetic"}));
  score_cmd->add_option("--value", score.value, "Constant scorer value");
  score_cmd->add_option("--scores-file", score.scores_file, "Score file for the file scorer");
  score_cmd->add_option("--scorer-url", score.url, "HTTP sidecar base URL (fallback: AKS_SCORER_URL)");
  score_cmd->add_option("--scorer-cmd", score.command, "Command line of a stdio sidecar");
  score_cmd->add_option("--transport", score.transport, "stdio | http")->check(CLI::IsMember({"stdio", "http"}));
  score_cmd->add_option("--batch-size", score.batch_size)->check(CLI::PositiveNumber);
  score_cmd->add_option("--timeout", score.timeout_s, "Per-request timeout in seconds")->check(CLI::PositiveNumber);
  score_cmd->add_option("--retries", score.retries)->check(CLI::NonNegativeNumber);
  score_cmd->add_option("--planted", score.planted, "Synthetic scorer intervals start:end:height[:shape],...");
  score_cmd->add_option("--noise", score.noise, "Synthetic scorer noise sigma");
  score_cmd->add_option("--baseline", score.baseline, "Synthetic scorer baseline");
  score_cmd->add_option("--seed", score.seed, "Synthetic scorer seed");
  score_cmd->add_option("--out", score.out, "Output score file (.csv or .jsonl); stdout when omitted");

  // select
  SelectArgs sel;
  auto* select_cmd = app.add_subcommand("select", "Select keyframes from a score file");
  select_cmd->add_option("--scores", sel.scores, "Score file")->required();
  select_cmd->add_option("--strategy", sel.strategy, "uni | top | bin | ada")
      ->check(CLI::IsMember({"uni", "top", "bin", "ada"}, CLI::ignore_case));
  select_cmd->add_option("--m", sel.m, "Keyframe budget M")->check(CLI::PositiveNumber);
  auto* level_opt = select_cmd->add_option("--max-level", sel.max_level, "Max level L")->check(CLI::Range(0, 30));
  auto* thr_opt = select_cmd->add_option("--s-thr", sel.s_thr, "Split threshold")->check(CLI::NonNegativeNumber);
  select_cmd->add_option("--lambda", sel.lambda, "Coverage weight recorded with the selection")
      ->check(CLI::NonNegativeNumber);
  select_cmd->add_option("--fps", sel.fps, "Candidate frame rate")->check(CLI::PositiveNumber);
  select_cmd->add_option("--preset", sel.preset, "default | concentrated (L=3, s_thr=0.2)")
      ->check(CLI::IsMember({"default", "concentrated"}));
  select_cmd->add_option("--out", sel.out, "Selection file; stdout when omitted");

  // coverage
  std::string cov_selection;
  std::optional<std::size_t> cov_t;
  std::optional<int> cov_level;
  std::optional<double> ripley_r;
  auto* cov_cmd = app.add_subcommand("coverage", "Coverage c(I) of a selection");
  cov_cmd->add_option("--selection", cov_selection, "Selection file")->required();
  cov_cmd->add_option("--T", cov_t, "Horizon T (default: from the selection file)");
  cov_cmd->add_option("--max-level", cov_level, "Levels L (default: from the selection file)")->check(CLI::Range(0, 30));
  cov_cmd->add_option("--ripley-r", ripley_r, "Also print the pair count closer than r")->check(CLI::PositiveNumber);

  // objective
  std::string obj_scores, obj_selection;
  double obj_lambda = 1.0;
  std::optional<int> obj_level;
  auto* obj_cmd = app.add_subcommand("objective", "Relevance + lambda * coverage of a selection");
  obj_cmd->add_option("--scores", obj_scores, "Score file")->required();
  obj_cmd->add_option("--selection", obj_selection, "Selection file")->required();
  obj_cmd->add_option("--lambda", obj_lambda)->check(CLI::NonNegativeNumber);
  obj_cmd->add_option("--max-level", obj_level, "Levels L (default: from the selection file)")->check(CLI::Range(0, 30));

  // oracle
  std::string or_scores, or_out;
  std::size_t or_m = 4;
  double or_lambda = 1.0;
  int or_level = 2;
  bool or_lex = false;
  std::size_t or_cap = aks::OracleConfig{}.max_subsets;
  unsigned or_workers = 0;
  auto* or_cmd = app.add_subcommand("oracle", "Exhaustive optimum over all size-M subsets");
  or_cmd->add_option("--scores", or_scores, "Score file")->required();
  or_cmd->add_option("--m", or_m)->check(CLI::PositiveNumber);
  or_cmd->add_option("--lambda", or_lambda)->check(CLI::NonNegativeNumber);
  or_cmd->add_option("--max-level", or_level)->check(CLI::Range(0, 30));
  or_cmd->add_flag("--lexicographic", or_lex, "Maximize coverage first, then relevance");
  or_cmd->add_option("--cap", or_cap, "Maximum number of subsets to enumerate");
  or_cmd->add_option("--workers", or_workers, "Enumeration threads (0: all cores)");
  or_cmd->add_option("--out", or_out, "Selection file for the optimum");

  // bench
  std::string bench_config, bench_out;
  std::optional<std::uint64_t> bench_seed;
  std::optional<unsigned> bench_workers;
  auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark grid");
  bench_cmd->add_option("--config", bench_config, "Benchmark configuration file")->required();
  bench_cmd->add_option("--out-dir", bench_out, "Override output_dir");
  bench_cmd->add_option("--seed", bench_seed, "Override seed");
  bench_cmd->add_option("--workers", bench_workers, "Override workers");

  // plot
  std::string plot_scores, plot_selection, plot_out;
  std::optional<int> plot_level;
  auto* plot_cmd = app.add_subcommand("plot", "Render scores and keyframes as SVG");
  plot_cmd->add_option("--scores", plot_scores, "Score file")->required();
  plot_cmd->add_option("--selection", plot_selection, "Selection file")->required();
  plot_cmd->add_option("--max-level", plot_level, "Bin gridlines level (default: from the selection file)")
      ->check(CLI::Range(0, 30));
  plot_cmd->add_option("--out", plot_out, "SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "aks: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*score_cmd) return run_score(score);
    if (*select_cmd) return run_select(sel, level_opt->count() > 0, thr_opt->count() > 0);
    if (*cov_cmd) {
      const auto s = aks::load_selection(cov_selection);
      const std::size_t horizon = cov_t.value_or(s.horizon);
      std::cout << aks::format_double(aks::coverage(s.indices, horizon, cov_level.value_or(s.params.max_level)))
                << '\n';
      if (ripley_r) std::cout << aks::ripley_k(s.indices, *ripley_r) << '\n';
      return 0;
    }
    if (*obj_cmd) {
      const auto series = aks::load_scores(obj_scores);
      const auto s = aks::load_selection(obj_selection);
      std::cout << aks::format_double(aks::objective(series, s, obj_lambda, obj_level.value_or(s.params.max_level)))
                << '\n';
      return 0;
    }
    if (*or_cmd) {
      const auto series = aks::load_scores(or_scores);
      aks::OracleConfig cfg{or_cap, or_workers};
      const auto res = or_lex ? aks::lexicographic(series, or_m, or_level, cfg)
                              : aks::brute_force(series, or_m, or_lambda, or_level, cfg);
      if (!or_out.empty()) aks::save_selection(res.selection, series, or_out);
      const double value = or_lex ? aks::objective(series, res.selection, or_lambda, or_level) : res.value;
      std::cout << aks::format_double(value) << '\n';
      return 0;
    }
    if (*bench_cmd) {
      auto cfg = aks::load_bench_config(bench_config, bench_seed);
      if (!bench_out.empty()) cfg.output_dir = bench_out;
      if (bench_workers) cfg.workers = *bench_workers;
      if (cfg.output_dir.empty()) throw aks::Error("bench needs output_dir in the config or --out-dir");
      const auto report = aks::run_grid(cfg);
      std::cout << report.summary;
      return 0;
    }
    if (*plot_cmd) {
      const auto series = aks::load_scores(plot_scores);
      const auto s = aks::load_selection(plot_selection);
      aks::emit_plot(series, s, plot_level.value_or(s.params.max_level), plot_out);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "aks: error: " << e.what() << '\n';
    return 1;
  }
  std::cerr << app.help();
  return 2;
}
