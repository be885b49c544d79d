#include "mcprioq/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mcprioq/errors.hpp"
#include "mcprioq/io.hpp"

namespace mcprioq {
namespace {

std::unique_ptr<Graph> load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open snapshot '" + path + "'");
  return read_snapshot(in);
}

// Writes next to the target and renames, so a failed run leaves no file.
void save_snapshot(const Graph& graph, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write snapshot '" + path + "'");
    try {
      write_snapshot(graph, out);
      out.close();
      if (!out) throw std::ios_base::failure("close failed");
    } catch (...) {
      std::remove(tmp.c_str());
      throw;
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    throw InputError("cannot write snapshot '" + path + "': " + ec.message());
  }
}

void print_stats(const Graph& graph, std::ostream& out) {
  const GraphStats s = graph.stats();
  out << "sources=" << s.sources << '\n'
      << "edges=" << s.edges << '\n'
      << "transitions=" << s.transitions << '\n';
}

// Runs `body`, mapping the library's exceptions onto exit codes.
template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const InvariantError& e) {
    err << "invariant violation: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const std::ios_base::failure& e) {
    err << "error: i/o failure: " << e.what() << '\n';
    return kExitInput;
  }
}

int report_violations(const std::vector<std::string>& problems, std::ostream& err) {
  for (const auto& p : problems) err << "invariant violation: " << p << '\n';
  return problems.empty() ? kExitOk : kExitInvariant;
}

}  // namespace

std::string format_item(const std::string& dst, double probability) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", probability);
  return dst + "," + buf;
}

int cmd_ingest(const IngestOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!options.decay_factor.is_decay_factor()) {
      throw InputError("decay factor must be in (0, 1]");
    }
    if (options.decay_every && *options.decay_every == 0) {
      throw InputError("decay-every must be >= 1");
    }
    std::ifstream in(options.input_path, std::ios::binary);
    if (!in) throw InputError("cannot open input '" + options.input_path + "'");

    DecayConfig config;
    config.factor = options.decay_factor;
    if (options.decay_every) {
      config.trigger = DecayConfig::EveryNTransitions{*options.decay_every};
    }
    Graph graph(config);
    std::uint64_t since_decay = 0;
    std::uint64_t decays = 0;
    const ParseStats parsed = for_each_transition(
        in, ParseOptions{options.lenient}, [&](const TransitionRecord& r) {
          graph.record_transition(r.src, r.dst);
          if (config.due(++since_decay, {})) {
            graph.decay();
            since_decay = 0;
            ++decays;
          }
        });
    graph.stabilize_all();
    if (int rc = report_violations(graph.check_invariants(), err); rc != kExitOk) {
      return rc;
    }
    save_snapshot(graph, options.snapshot_out);
    out << "lines=" << parsed.lines << '\n'
        << "records=" << parsed.records << '\n'
        << "skipped=" << parsed.skipped << '\n'
        << "decays=" << decays << '\n';
    print_stats(graph, out);
    return kExitOk;
  });
}

int cmd_query(const QueryOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (const auto* t = std::get_if<Threshold>(&options.mode)) validate_threshold(t->t);
    const NodeId src(options.src);
    const auto graph = load_snapshot(options.snapshot_path);
    const Recommendation rec =
        std::holds_alternative<TopN>(options.mode)
            ? graph->recommend_top_n(src, std::get<TopN>(options.mode).k)
            : graph->recommend_cumulative(src, std::get<Threshold>(options.mode).t);
    if (!rec.found) {
      err << "unknown source '" << options.src << "'\n";
      return kExitOk;
    }
    for (const RecommendedItem& item : rec.items) {
      out << format_item(item.dst, item.probability) << '\n';
    }
    return kExitOk;
  });
}

int cmd_decay(const DecayOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!options.factor.is_decay_factor()) {
      throw InputError("decay factor must be in (0, 1], got " +
                       options.factor.to_string());
    }
    const auto graph = load_snapshot(options.snapshot_in);
    const DecayResult result = graph->decay(options.factor);
    graph->stabilize_all();
    if (int rc = report_violations(graph->check_invariants(), err); rc != kExitOk) {
      return rc;
    }
    save_snapshot(*graph, options.snapshot_out);
    out << "edges_removed=" << result.edges_removed << '\n'
        << "sources_emptied=" << result.sources_emptied << '\n';
    return kExitOk;
  });
}

int cmd_bench(const BenchOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    Graph graph;
    const BenchReport report = run_bench(options.workload, graph);
    if (options.json) {
      out << report.to_json() << '\n';
    } else {
      out << report.to_key_values();
    }
    for (const auto& v : report.violations) err << "violation: " << v << '\n';
    if (!report.passed()) return kExitInvariant;
    if (!options.snapshot_out.empty()) save_snapshot(graph, options.snapshot_out);
    return kExitOk;
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Concurrent sparse Markov chain with count-sorted edge queues",
               "mcprioq"};
  app.require_subcommand(1);

  IngestOptions ingest;
  std::string ingest_factor = "1/2";
  std::uint64_t decay_every = 0;
  auto* ingest_cmd = app.add_subcommand("ingest", "Build a snapshot from a src,dst stream");
  ingest_cmd->add_option("--input", ingest.input_path, "Transition file")->required();
  ingest_cmd->add_option("--snapshot-out", ingest.snapshot_out, "Snapshot to write")
      ->required();
  auto* every_opt =
      ingest_cmd->add_option("--decay-every", decay_every, "Decay every N transitions");
  ingest_cmd->add_option("--decay-factor", ingest_factor, "Decay factor, e.g. 1/2");
  ingest_cmd->add_flag("--lenient", ingest.lenient, "Skip malformed lines");

  QueryOptions query;
  std::size_t top_n = 0;
  double threshold = 0.0;
  auto* query_cmd = app.add_subcommand("query", "Recommend destinations for a source");
  query_cmd->add_option("--snapshot", query.snapshot_path, "Snapshot to read")
      ->required();
  query_cmd->add_option("--src", query.src, "Source node")->required();
  auto* top_opt = query_cmd->add_option("--top-n", top_n, "Number of items");
  auto* thr_opt = query_cmd->add_option("--threshold", threshold, "Cumulative probability");
  top_opt->excludes(thr_opt);
  thr_opt->excludes(top_opt);

  DecayOptions decay;
  std::string decay_factor;
  auto* decay_cmd = app.add_subcommand("decay", "Scale all counts of a snapshot");
  decay_cmd->add_option("--snapshot", decay.snapshot_in, "Snapshot to read")->required();
  decay_cmd->add_option("--factor", decay_factor, "Factor in (0, 1]")->required();
  decay_cmd->add_option("--snapshot-out", decay.snapshot_out, "Snapshot to write")
      ->required();

  BenchOptions bench;
  WorkloadConfig& w = bench.workload;
  auto* bench_cmd = app.add_subcommand("bench", "Concurrent stress benchmark");
  bench_cmd->add_option("--nodes", w.nodes, "Node count")->required();
  bench_cmd->add_option("--writers", w.writers, "Writer threads")->required();
  bench_cmd->add_option("--readers", w.readers, "Reader threads")->required();
  bench_cmd->add_option("--duration-secs", w.duration_secs, "Run time")->required();
  bench_cmd->add_option("--zipf-s", w.zipf_s, "Zipf exponent")->capture_default_str();
  bench_cmd->add_option("--seed", w.seed, "Workload seed")->capture_default_str();
  bench_cmd->add_option("--sources", w.sources, "Restrict sources to the first N nodes");
  bench_cmd->add_option("--ops-per-writer", w.ops_per_writer,
                        "Fixed update count per writer instead of a duration");
  bench_cmd->add_option("--top-n", w.top_n, "Items per top-n query")
      ->capture_default_str();
  bench_cmd->add_flag("--json", bench.json, "Print the report as JSON");
  bench_cmd->add_option("--snapshot-out", bench.snapshot_out,
                        "Write the final graph as a snapshot");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  if (ingest_cmd->parsed()) {
    return guarded(err, [&] {
      ingest.decay_factor = Rational::parse(ingest_factor);
      if (every_opt->count() > 0) ingest.decay_every = decay_every;
      return cmd_ingest(ingest, out, err);
    });
  }
  if (query_cmd->parsed()) {
    if (top_opt->count() > 0) {
      query.mode = TopN{top_n};
    } else if (thr_opt->count() > 0) {
      query.mode = Threshold{threshold};
    } else {
      err << "error: query needs --top-n or --threshold\n";
      return kExitInput;
    }
    return cmd_query(query, out, err);
  }
  if (decay_cmd->parsed()) {
    return guarded(err, [&] {
      decay.factor = Rational::parse(decay_factor);
      return cmd_decay(decay, out, err);
    });
  }
  return cmd_bench(bench, out, err);
}

}  // namespace mcprioq
