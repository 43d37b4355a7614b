// lngossip: simulate, compare, analyze and synth subcommands.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lngossip/catalog.hpp"
#include "lngossip/engine.hpp"
#include "lngossip/errors.hpp"
#include "lngossip/payments.hpp"
#include "lngossip/protocols.hpp"
#include "lngossip/topology.hpp"
#include "lngossip/trace.hpp"
#include "lngossip/workload.hpp"

namespace fs = std::filesystem;
using namespace lngossip;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kInput = 2, kInternal = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SimArgs {
  std::string snapshot;
  std::string trace;
  std::size_t synth_nodes = 0;
  std::size_t synth_m = 4;
  std::size_t synth_messages = 2000;
  double duration = 1200;
  double drain = 1800;
  std::size_t payments = 10000;
  std::uint64_t amount = 1000;
  std::string payments_file;
  std::optional<std::uint64_t> seed;
  bool keepalives = false;
  bool prune = false;
  std::vector<std::string> overrides;
  std::string out;
};

void add_input_flags(CLI::App* cmd, SimArgs& a) {
  cmd->add_option("--snapshot", a.snapshot, "Snapshot file (JSON Lines)");
  cmd->add_option("--trace", a.trace, "Trace file to replay (JSON Lines)");
  cmd->add_option("--synth-nodes", a.synth_nodes, "Generate a synthetic topology with this many nodes");
  cmd->add_option("--synth-m", a.synth_m, "Channels opened per new node in the synthetic topology")
      ->capture_default_str();
  cmd->add_option("--synth-messages", a.synth_messages, "Synthetic messages over the run")
      ->capture_default_str();
  cmd->add_option("--duration", a.duration, "Workload duration, seconds")->capture_default_str();
  cmd->add_option("--drain", a.drain, "Extra simulated time after the workload, seconds")
      ->capture_default_str();
  cmd->add_option("--payments", a.payments, "Random payment attempts")->capture_default_str();
  cmd->add_option("--amount", a.amount, "Payment amount, msat")->capture_default_str();
  cmd->add_option("--payments-file", a.payments_file, "Payment schedule (JSON Lines)");
  cmd->add_option("--seed", a.seed, "Seed (falls back to LNGOSSIP_SEED, then 1)");
  cmd->add_flag("--keepalives", a.keepalives, "Let nodes originate keep-alive updates");
  cmd->add_flag("--prune", a.prune, "Skip policies older than the prune age when routing");
  cmd->add_option("--override", a.overrides, "Protocol parameter override key=value (repeatable)");
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("LNGOSSIP_SEED")) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError("LNGOSSIP_SEED is not an unsigned integer");
  }
  return 1;
}

ProtocolSpec resolve_protocol(const std::string& name, const std::vector<std::string>& overrides) {
  ProtocolSpec spec;
  try {
    spec = preset(name);
  } catch (const std::invalid_argument&) {
    std::string list;
    for (const auto& n : preset_names()) list += "\n  " + n;
    throw UsageError("unknown protocol '" + name + "'; presets:" + list);
  }
  for (const auto& o : overrides) {
    try {
      apply_override(spec, o);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  return spec;
}

Workload build_workload(const SimArgs& a, std::uint64_t seed) {
  const bool has_snapshot = !a.snapshot.empty();
  const bool has_synth = a.synth_nodes > 0;
  if (has_snapshot == has_synth) throw UsageError("give exactly one of --snapshot or --synth-nodes");
  if (has_snapshot && a.trace.empty()) throw UsageError("--snapshot needs --trace");
  if (a.duration < 0 || a.drain < 0) throw UsageError("--duration and --drain must be non-negative");

  Workload w;
  w.duration = from_seconds(a.duration);
  w.drain = from_seconds(a.drain);
  if (has_snapshot) {
    w.snapshot = std::make_shared<NetworkSnapshot>(load_snapshot(a.snapshot));
    w.trace = load_trace(a.trace);
  } else {
    SyntheticParams p;
    p.nodes = a.synth_nodes;
    p.attach_m = a.synth_m;
    p.duration = w.duration;
    p.seed = seed;
    p.mix = TrafficMix::observed(a.duration > 0 ? static_cast<double>(a.synth_messages) / a.duration : 0.0);
    if (p.nodes <= p.attach_m) throw UsageError("--synth-nodes must exceed --synth-m");
    auto synth = generate_synthetic(p);
    if (!a.trace.empty()) {
      w.trace = load_trace(a.trace);
    } else {
      w.trace = std::move(synth.trace);
    }
    w.snapshot = std::make_shared<NetworkSnapshot>(std::move(synth.snapshot));
  }
  if (!a.payments_file.empty()) {
    w.payments = load_payments(a.payments_file);
  } else if (a.payments > 0 && w.snapshot->node_count() >= 2) {
    Rng rng = Rng::stream(seed, "payments");
    w.payments = generate_payments(a.payments, w.duration, a.amount, w.snapshot->node_count(), rng);
  }
  return w;
}

EngineOptions engine_options(const ProtocolSpec& spec, const SimArgs& a, std::uint64_t seed) {
  EngineOptions o;
  o.protocol = spec;
  o.seed = seed;
  o.originate_keepalives = a.keepalives;
  o.prune_stale_routes = a.prune;
  return o;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

template <typename F>
void write_with(const fs::path& path, F&& fill) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  fill(out);
}

fs::path sidecar(const fs::path& out, const std::string& suffix) {
  fs::path p = out;
  p.replace_extension();
  return p.string() + suffix;
}

int cmd_simulate(const SimArgs& a, const std::string& protocol) {
  const auto seed = resolve_seed(a.seed);
  const auto spec = resolve_protocol(protocol, a.overrides);
  const auto workload = build_workload(a, seed);
  std::clog << "simulate: " << spec.name << ", " << workload.snapshot->node_count() << " nodes, "
            << workload.trace.records.size() << " messages, " << workload.payments.size()
            << " payments, seed " << seed << '\n';
  const auto report = run_experiment(workload, engine_options(spec, a, seed));
  const auto json = report.canonical_json();
  if (a.out.empty()) {
    std::cout << json;
    return kOk;
  }
  write_file(a.out, json);
  write_with(sidecar(a.out, ".convergence.csv"), [&](auto& o) { report.write_convergence_csv(o); });
  write_with(sidecar(a.out, ".redundancy.csv"), [&](auto& o) { report.write_redundancy_csv(o); });
  write_with(sidecar(a.out, ".waiting.csv"), [&](auto& o) { report.write_waiting_csv(o); });
  std::clog << "wrote " << a.out << '\n';
  return kOk;
}

int cmd_compare(const SimArgs& a, const std::vector<std::string>& protocols) {
  if (protocols.size() < 2) throw UsageError("compare needs at least two --protocol values");
  const auto seed = resolve_seed(a.seed);
  std::vector<ProtocolSpec> specs;
  for (const auto& p : protocols) specs.push_back(resolve_protocol(p, a.overrides));
  const auto workload = build_workload(a, seed);

  std::ostringstream csv;
  csv << "protocol,p95_s,mean_s,p100_s,total_bytes,overhead_factor,unconverged,stale_failure\n";
  for (const auto& spec : specs) {
    std::clog << "compare: running " << spec.name << '\n';
    const auto r = run_experiment(workload, engine_options(spec, a, seed));
    csv << spec.name << ',' << fixed6(r.convergence.p95) << ',' << fixed6(r.convergence.mean) << ','
        << fixed6(r.convergence.p100) << ',' << r.total_bytes << ',' << fixed6(r.overhead_factor)
        << ',' << r.payments.unconverged << ',' << r.payments.stale_failure << '\n';
  }
  if (a.out.empty()) {
    std::cout << csv.str();
  } else {
    write_file(a.out, csv.str());
    std::clog << "wrote " << a.out << '\n';
  }
  return kOk;
}

int cmd_analyze(const std::string& trace_path, const std::string& baseline, const std::string& out,
                std::uint64_t bucket) {
  const auto trace = load_trace(trace_path);
  std::optional<NetworkSnapshot> snap;
  CatalogOptions opts;
  opts.keepalive_bucket = bucket;
  if (!baseline.empty()) {
    snap = load_snapshot(baseline);
    opts.baseline = &*snap;
  }
  const auto report = catalog_trace(trace, opts);
  const auto json = report.to_json().dump(2) + "\n";
  if (out.empty()) {
    std::cout << json;
    return kOk;
  }
  write_file(out, json);
  write_with(sidecar(out, ".keepalive.csv"), [&](auto& o) {
    o << "bucket,count\n";
    for (const auto& [b, c] : report.keepalive_interarrival) o << b << ',' << c << '\n';
  });
  write_with(sidecar(out, ".closure.csv"), [&](auto& o) {
    o << "duration_s,cdf\n";
    const auto n = report.closure_durations.size();
    for (std::size_t i = 0; i < n; ++i) {
      o << report.closure_durations[i] << ',' << fixed6(static_cast<double>(i + 1) / static_cast<double>(n))
        << '\n';
    }
  });
  std::clog << "wrote " << out << '\n';
  return kOk;
}

int cmd_synth(std::size_t nodes, std::size_t m, std::size_t messages, double duration,
              const std::optional<std::uint64_t>& seed_flag, const std::string& snapshot_out,
              const std::string& trace_out) {
  if (nodes <= m || m < 1) throw UsageError("need --nodes > --m >= 1");
  if (duration < 0) throw UsageError("--duration must be non-negative");
  SyntheticParams p;
  p.nodes = nodes;
  p.attach_m = m;
  p.duration = from_seconds(duration);
  p.seed = resolve_seed(seed_flag);
  p.mix = TrafficMix::observed(duration > 0 ? static_cast<double>(messages) / duration : 0.0);
  const auto w = generate_synthetic(p);
  write_with(snapshot_out, [&](auto& o) { write_snapshot(o, w.snapshot); });
  write_with(trace_out, [&](auto& o) { write_trace(o, w.trace); });
  std::clog << "synth: " << w.snapshot.node_count() << " nodes, " << w.snapshot.channel_count()
            << " channels, " << w.trace.records.size() << " messages\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gossip propagation simulator and trace analyzer"};
  app.require_subcommand(1);

  SimArgs sim_args;
  std::string protocol = "lnd";
  auto* simulate = app.add_subcommand("simulate", "Run one protocol and write a report");
  add_input_flags(simulate, sim_args);
  simulate->add_option("--protocol", protocol, "Protocol preset")->capture_default_str();
  simulate->add_option("--out", sim_args.out, "Report path (JSON); CSV sidecars go next to it");

  SimArgs cmp_args;
  std::vector<std::string> protocols;
  auto* compare = app.add_subcommand("compare", "Run several presets on one workload");
  add_input_flags(compare, cmp_args);
  compare->add_option("--protocol", protocols, "Protocol presets (two or more)")->required();
  compare->add_option("--out", cmp_args.out, "CSV output path");

  std::string trace_path, baseline, analyze_out;
  std::uint64_t bucket = 1800;
  auto* analyze = app.add_subcommand("analyze", "Classify a trace's channel updates");
  analyze->add_option("--trace", trace_path, "Trace file")->required();
  analyze->add_option("--snapshot", baseline, "Snapshot supplying each edge's prior policy");
  analyze->add_option("--bucket", bucket, "Keep-alive histogram bucket, seconds")->capture_default_str();
  analyze->add_option("--out", analyze_out, "Report path (JSON); CSV sidecars go next to it");

  std::size_t synth_nodes = 1000, synth_m = 4, synth_messages = 2000;
  double synth_duration = 1200;
  std::optional<std::uint64_t> synth_seed;
  std::string snapshot_out, trace_out;
  auto* synth = app.add_subcommand("synth", "Write a synthetic snapshot and trace");
  synth->add_option("--nodes", synth_nodes)->capture_default_str();
  synth->add_option("--m", synth_m)->capture_default_str();
  synth->add_option("--messages", synth_messages)->capture_default_str();
  synth->add_option("--duration", synth_duration)->capture_default_str();
  synth->add_option("--seed", synth_seed);
  synth->add_option("--snapshot-out", snapshot_out)->required();
  synth->add_option("--trace-out", trace_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*simulate) return cmd_simulate(sim_args, protocol);
    if (*compare) return cmd_compare(cmp_args, protocols);
    if (*analyze) return cmd_analyze(trace_path, baseline, analyze_out, bucket);
    if (*synth) {
      return cmd_synth(synth_nodes, synth_m, synth_messages, synth_duration, synth_seed, snapshot_out,
                       trace_out);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInput;
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInput;
  } catch (const ValidationError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInput;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInput;
  } catch (const std::exception& e) {
    const std::string what = e.what();
    // loaders report unreadable files as runtime_error("cannot open ...")
    if (what.rfind("cannot open", 0) == 0) {
      std::cerr << "input error: " << what << '\n';
      return kInput;
    }
    std::cerr << "internal error: " << what << '\n';
    return kInternal;
  }
  return kUsage;
}
