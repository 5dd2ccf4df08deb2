#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "prefopt/errors.hpp"
#include "prefopt/harness.hpp"
#include "prefopt/io.hpp"
#include "prefopt/loss.hpp"
#include "prefopt/pairs.hpp"
#include "prefopt/pipeline.hpp"
#include "prefopt/ranker.hpp"
#include "prefopt/taskk.hpp"
#include "stage.hpp"

namespace prefopt::pipeline {

namespace fs = std::filesystem;
using detail::run_stage;
using detail::StageSpec;

namespace {

template <typename T>
void sort_by_id(std::vector<T>& items) {
  std::stable_sort(items.begin(), items.end(), [](const T& a, const T& b) { return a.id < b.id; });
}

std::string describe(const ValidationReport& report) {
  std::ostringstream out;
  out << report.size() << " dataset violation(s):";
  for (const auto& v : report) out << "\n  " << to_string(v.kind) << " [" << v.id << "]: " << v.message;
  return out.str();
}

std::vector<EvalRecord> sorted_evals(std::vector<EvalRecord> evals, const std::string& origin) {
  std::sort(evals.begin(), evals.end(),
            [](const EvalRecord& a, const EvalRecord& b) { return a.candidate_id < b.candidate_id; });
  for (std::size_t i = 1; i < evals.size(); ++i) {
    if (evals[i].candidate_id == evals[i - 1].candidate_id)
      throw DataError(DataError::Kind::schema, origin, 0,
                      "more than one result for candidate '" + evals[i].candidate_id + "'");
  }
  return evals;
}

}  // namespace

Outcome cmd_validate(const Context& ctx, const ValidateInputs& in) {
  StageSpec spec{"validate", {}, {in.problems, in.candidates}, {"problems.jsonl", "candidates.jsonl"}};
  if (in.evals) spec.external.push_back(*in.evals);
  return run_stage(ctx, spec, [&] {
    auto problems = read_problems(in.problems);
    auto candidates = read_candidates(in.candidates);
    std::vector<EvalRecord> evals;
    if (in.evals) evals = read_evals(*in.evals);
    auto report = validate_dataset(problems, candidates, evals);
    if (!report.empty()) throw DataError(DataError::Kind::schema, {}, 0, describe(report));
    sort_by_id(problems);
    sort_by_id(candidates);
    return std::map<std::string, std::string>{{"problems.jsonl", to_jsonl(problems)},
                                              {"candidates.jsonl", to_jsonl(candidates)}};
  });
}

Outcome cmd_evaluate(const Context& ctx, BackendKind backend, const fs::path& source) {
  StageSpec spec{"evaluate", {"problems.jsonl", "candidates.jsonl"}, {source}, {"evals.jsonl"}};
  return run_stage(ctx, spec, [&] {
    const auto problems = read_problems(ctx.out_dir / "problems.jsonl");
    const auto candidates = read_candidates(ctx.out_dir / "candidates.jsonl");
    std::vector<EvalRecord> evals;
    if (backend == BackendKind::mock) {
      evals = evaluate_all(problems, candidates, MockBackend::from_file(source));
    } else {
      evals = evaluate_all(problems, candidates, ReplayBackend::from_file(source));
    }
    return std::map<std::string, std::string>{{"evals.jsonl", to_jsonl(evals)}};
  });
}

Outcome cmd_ingest(const Context& ctx, const fs::path& raw_results) {
  StageSpec spec{"ingest", {"candidates.jsonl"}, {raw_results}, {"evals.jsonl"}};
  return run_stage(ctx, spec, [&] {
    std::set<std::string> known;
    for (const auto& c : read_candidates(ctx.out_dir / "candidates.jsonl")) known.insert(c.id);
    auto evals = sorted_evals(ingest_results(raw_results, &known), raw_results.string());
    return std::map<std::string, std::string>{{"evals.jsonl", to_jsonl(evals)}};
  });
}

Outcome cmd_rank(const Context& ctx, const std::optional<fs::path>& tests) {
  StageSpec spec{"rank", {"candidates.jsonl", "evals.jsonl"}, {}, {"scores.jsonl"}};
  if (tests) spec.external.push_back(*tests);
  return run_stage(ctx, spec, [&] {
    const auto candidates = read_candidates(ctx.out_dir / "candidates.jsonl");
    const auto evals = read_evals(ctx.out_dir / "evals.jsonl");
    std::vector<TestCase> test_cases;
    if (tests) test_cases = read_tests(*tests);
    const auto graphs = build_links(candidates, evals, test_cases);
    return std::map<std::string, std::string>{{"scores.jsonl", scores_to_jsonl(rank_all(graphs, ctx.config))}};
  });
}

Outcome cmd_partition(const Context& ctx) {
  StageSpec spec{"partition", {"problems.jsonl"}, {}, {"partition.jsonl"}};
  return run_stage(ctx, spec, [&] {
    std::vector<std::string> ids;
    for (const auto& p : read_problems(ctx.out_dir / "problems.jsonl")) ids.push_back(p.id);
    const auto part = partition_seeds(std::move(ids), ctx.config.proportions, ctx.config.seed);
    return std::map<std::string, std::string>{{"partition.jsonl", partition_to_jsonl(part)}};
  });
}

Outcome cmd_pairs(const Context& ctx) {
  StageSpec spec{"pairs",
                 {"problems.jsonl", "candidates.jsonl", "evals.jsonl", "scores.jsonl", "partition.jsonl"},
                 {},
                 {"pairs.jsonl"}};
  return run_stage(ctx, spec, [&] {
    const auto problems = read_problems(ctx.out_dir / "problems.jsonl");
    const auto candidates = read_candidates(ctx.out_dir / "candidates.jsonl");
    const auto evals = read_evals(ctx.out_dir / "evals.jsonl");
    const auto partition = read_partition(ctx.out_dir / "partition.jsonl");
    std::map<std::string, double> scores;
    for (const auto& s : read_scores(ctx.out_dir / "scores.jsonl")) {
      if (s.kind == NodeKind::code) scores.emplace(s.node_id, s.score);
    }

    std::map<std::string, const EvalRecord*> eval_of;
    for (const auto& e : evals) eval_of.emplace(e.candidate_id, &e);
    std::map<std::string, std::vector<ScoredCandidate>> pool;
    for (const auto& c : candidates) {
      auto it = eval_of.find(c.id);
      if (it == eval_of.end())
        throw DataError(DataError::Kind::reference, "evals.jsonl", 0, "no eval record for candidate '" + c.id + "'");
      pool[c.problem_id].push_back({&c, it->second});
    }

    std::vector<const Problem*> work;
    for (const auto& p : problems) work.push_back(&p);
    std::vector<std::vector<PreferencePair>> per_problem(work.size());
    const auto n = static_cast<long>(work.size());
    std::vector<std::string> errors(work.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
      const Problem& p = *work[i];
      auto cat = partition.find(p.id);
      if (cat == partition.end()) continue;
      auto objective = objective_for(cat->second);
      auto members = pool.find(p.id);
      if (!objective || members == pool.end()) continue;
      try {
        per_problem[i] = build_pairs(p, members->second, scores, *objective, ctx.config.score_epsilon,
                                     ctx.config.severity_threshold);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
    for (const auto& e : errors) {
      if (!e.empty()) throw DataError(DataError::Kind::reference, "scores.jsonl", 0, e);
    }
    std::vector<PreferencePair> pairs;
    for (auto& chunk : per_problem) pairs.insert(pairs.end(), chunk.begin(), chunk.end());
    pairs = subsample_pairs(pairs, ctx.config.subsample_fraction, ctx.config.seed);
    return std::map<std::string, std::string>{{"pairs.jsonl", pairs_to_jsonl(pairs)}};
  });
}

Outcome cmd_loss(const Context& ctx, const fs::path& loss_inputs) {
  StageSpec spec{"loss", {}, {loss_inputs}, {"loss_report.jsonl"}};
  return run_stage(ctx, spec, [&] {
    auto inputs = read_loss_inputs(loss_inputs);
    std::stable_sort(inputs.begin(), inputs.end(),
                     [](const LossInput& a, const LossInput& b) { return a.pair_id < b.pair_id; });
    const auto params = LossParams::from(ctx.config);
    const auto rows = total_loss_batch(inputs, params);
    return std::map<std::string, std::string>{{"loss_report.jsonl", loss_report_jsonl(inputs, rows, params)}};
  });
}

Outcome cmd_metrics(const Context& ctx) {
  StageSpec spec{"metrics", {"problems.jsonl", "candidates.jsonl", "evals.jsonl"}, {}, {"metrics.csv", "metrics.txt"}};
  return run_stage(ctx, spec, [&] {
    const auto problems = read_problems(ctx.out_dir / "problems.jsonl");
    const auto candidates = read_candidates(ctx.out_dir / "candidates.jsonl");
    const auto evals = read_evals(ctx.out_dir / "evals.jsonl");
    const auto counts = count_by_problem(problems, candidates, evals, ctx.config.severity_threshold,
                                         ctx.config.secure_counting);
    const auto report = aggregate(counts, ctx.config.k_values, ctx.config.secure_counting);
    return std::map<std::string, std::string>{{"metrics.csv", render_csv(report)},
                                              {"metrics.txt", render_table(report)}};
  });
}

Outcome cmd_report(const Context& ctx) {
  StageSpec spec{"report",
                 {"problems.jsonl", "candidates.jsonl", "evals.jsonl", "partition.jsonl", "pairs.jsonl", "metrics.csv"},
                 {},
                 {"report.md"}};
  if (Manifest::load(ctx.out_dir).producer_of("loss_report.jsonl")) spec.upstream.push_back("loss_report.jsonl");
  return run_stage(ctx, spec, [&] {
    return std::map<std::string, std::string>{{"report.md", render_report(ctx.out_dir)}};
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Preference-optimization data pipeline: evaluate, rank, pair, score losses, report Task@k."};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::string backend_name;
  app.add_option("--config", config_path, "flat key = value config file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "artifact directory")->capture_default_str();
  app.add_option("--seed", seed, "seed for partitioning and subsampling (overrides config)");
  app.add_option("--backend", backend_name, std::string("evaluation backend; defaults to $") + kBackendEnv + " or mock")
      ->check(CLI::IsMember({"mock", "replay"}));

  std::map<std::string, std::string> overrides;
  std::vector<std::pair<std::string, CLI::Option*>> override_opts;
  for (const auto& key : config_keys()) {
    if (key == "seed") continue;
    auto flag = key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    override_opts.emplace_back(key, app.add_option("--" + flag, overrides[key], "override config key " + key)
                                        ->group("Config overrides"));
  }

  ValidateInputs vin;
  std::string vin_evals;
  auto* validate = app.add_subcommand("validate", "check dataset invariants and import problems/candidates");
  validate->add_option("--problems", vin.problems, "problems.jsonl")->required()->check(CLI::ExistingFile);
  validate->add_option("--candidates", vin.candidates, "candidates.jsonl")->required()->check(CLI::ExistingFile);
  validate->add_option("--evals", vin_evals, "optional evals.jsonl to check as well")->check(CLI::ExistingFile);

  std::string rules, raw_for_replay;
  auto* evaluate = app.add_subcommand("evaluate", "evaluate candidates through a backend");
  evaluate->add_option("--rules", rules, "mock backend rule file")->check(CLI::ExistingFile);
  evaluate->add_option("--raw", raw_for_replay, "recorded raw results for the replay backend")
      ->check(CLI::ExistingFile);

  std::string raw_results;
  auto* ingest = app.add_subcommand("ingest", "ingest recorded compile/test/gas/analysis results");
  ingest->add_option("--raw", raw_results, "raw_results.jsonl")->required()->check(CLI::ExistingFile);

  std::string tests_path;
  auto* rank_cmd = app.add_subcommand("rank", "mutual-validation ranking of candidates and tests");
  rank_cmd->add_option("--tests", tests_path, "optional tests.jsonl for multi-test graphs")->check(CLI::ExistingFile);

  auto* partition = app.add_subcommand("partition", "split problems into disjoint objective categories");
  auto* pairs = app.add_subcommand("pairs", "build chosen/rejected preference pairs");

  std::string loss_inputs;
  auto* loss = app.add_subcommand("loss", "score preference losses");
  loss->add_option("--inputs", loss_inputs, "loss_inputs.jsonl")->required()->check(CLI::ExistingFile);

  auto* metrics = app.add_subcommand("metrics", "Task@k report (CSV + text table)");
  auto* report = app.add_subcommand("report", "markdown summary of all artifacts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  Context ctx;
  ctx.out_dir = out_dir;
  ctx.log = &err;
  try {
    if (!config_path.empty()) ctx.config = load_config(config_path);
    for (const auto& [key, opt] : override_opts) {
      if (opt->count() > 0) set_config_value(ctx.config, key, overrides[key]);
    }
    if (seed) ctx.config.seed = *seed;
    validate_config(ctx.config);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }

  BackendKind backend = BackendKind::mock;
  if (backend_name.empty()) {
    if (const char* env = std::getenv(kBackendEnv)) backend_name = env;
  }
  if (backend_name == "replay") {
    backend = BackendKind::replay;
  } else if (!backend_name.empty() && backend_name != "mock") {
    err << "usage error: unknown backend '" << backend_name << "' (expected mock or replay)\n";
    return 2;
  }

  try {
    if (*validate) {
      if (!vin_evals.empty()) vin.evals = vin_evals;
      cmd_validate(ctx, vin);
      out << "dataset is valid\n";
    } else if (*evaluate) {
      const auto& source = backend == BackendKind::mock ? rules : raw_for_replay;
      if (source.empty()) {
        err << "usage error: the " << (backend == BackendKind::mock ? "mock backend needs --rules" : "replay backend needs --raw")
            << "\n";
        return 2;
      }
      cmd_evaluate(ctx, backend, source);
    } else if (*ingest) {
      cmd_ingest(ctx, raw_results);
    } else if (*rank_cmd) {
      cmd_rank(ctx, tests_path.empty() ? std::nullopt : std::optional<fs::path>(tests_path));
    } else if (*partition) {
      cmd_partition(ctx);
    } else if (*pairs) {
      cmd_pairs(ctx);
    } else if (*loss) {
      cmd_loss(ctx, loss_inputs);
    } else if (*metrics) {
      cmd_metrics(ctx);
      out << read_file(ctx.out_dir / "metrics.txt");
    } else if (*report) {
      cmd_report(ctx);
    }
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return 1;
  } catch (const StaleInputError& e) {
    err << "stale input: " << e.what() << "\n";
    return 1;
  } catch (const BackendError& e) {
    err << "backend error: " << e.what() << "\n";
    return 1;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace prefopt::pipeline
