#include "socketstore/cli/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "socketstore/dsa/dsa.hpp"
#include "socketstore/error.hpp"
#include "socketstore/moduledef/manifest.hpp"
#include "socketstore/netsim/topology_io.hpp"
#include "socketstore/store/store.hpp"

namespace socketstore::cli {

using nlohmann::json;

ExperimentConfig default_experiment() {
  ExperimentConfig c;
  c.injection = netsim::LatencyInjection{"R4-B", from_ms(10.0), from_ms(40.0), from_ms(60.0)};
  return c;
}

void validate(const ExperimentConfig& c) {
  auto bad = [](const std::string& what) { throw Error(Errc::config_error, "invalid experiment config: " + what); };
  if (c.packet_count < 1) bad("packet_count must be at least 1");
  if (!(c.gap_ms >= 0.0)) bad("gap_ms must be non-negative");
  if (!(c.deadline_ms > 0.0)) bad("deadline_ms must be positive");
  if (c.k < 1) bad("k must be at least 1");
  if (!(c.rate_mbps > 0.0)) bad("rate_mbps must be positive");
  if (!(c.jitter_ms >= 0.0)) bad("jitter_ms must be non-negative");
  if (c.module_id.empty()) bad("module_id must not be empty");
  if (c.src.empty() || c.dst.empty() || c.src == c.dst) bad("src and dst must be distinct hosts");
  if (c.output.empty()) bad("output must not be empty");
  if (c.injection) {
    if (c.injection->end <= c.injection->start) bad("injection window is empty");
    if (c.injection->extra <= SimDuration{0}) bad("injection extra_ms must be positive");
  }
}

ExperimentConfig experiment_from_json(const json& doc, const std::filesystem::path& base_dir) {
  static const std::set<std::string> known = {"topology", "module_id", "module_dir", "src", "dst", "packet_count",
                                              "gap_ms", "deadline_ms", "injection", "k", "rate_mbps", "app_id",
                                              "purchase", "jitter_ms", "output", "plot"};
  if (!doc.is_object()) throw Error(Errc::config_error, "experiment config must be an object");
  for (const auto& [key, _] : doc.items()) {
    if (!known.count(key)) throw Error(Errc::config_error, "unknown experiment field: " + key);
  }
  ExperimentConfig c;
  try {
    c.topology = doc.value("topology", c.topology);
    c.module_id = doc.value("module_id", c.module_id);
    c.src = doc.value("src", c.src);
    c.dst = doc.value("dst", c.dst);
    if (doc.contains("packet_count")) {
      const auto n = doc.at("packet_count").get<long long>();
      if (n < 1) throw Error(Errc::config_error, "invalid experiment config: packet_count must be at least 1");
      c.packet_count = static_cast<std::size_t>(n);
    }
    c.gap_ms = doc.value("gap_ms", c.gap_ms);
    c.deadline_ms = doc.value("deadline_ms", c.deadline_ms);
    c.k = doc.value("k", c.k);
    c.rate_mbps = doc.value("rate_mbps", c.rate_mbps);
    c.app_id = doc.value("app_id", c.app_id);
    c.purchase = doc.value("purchase", c.purchase);
    c.jitter_ms = doc.value("jitter_ms", c.jitter_ms);
    c.output = doc.value("output", c.output.string());
    if (doc.contains("plot")) c.plot = doc.at("plot").get<std::string>();
    if (doc.contains("injection") && !doc.at("injection").is_null()) {
      const json& i = doc.at("injection");
      c.injection = netsim::LatencyInjection{i.at("link").get<std::string>(), from_ms(i.at("extra_ms").get<double>()),
                                             from_ms(i.at("start_ms").get<double>()),
                                             from_ms(i.at("end_ms").get<double>())};
    }
    if (doc.contains("module_dir")) {
      c.module_dir = doc.at("module_dir").get<std::string>();
    } else if (!c.baseline()) {
      c.module_dir = std::filesystem::path("..") / c.module_id;
    }
  } catch (const json::exception& e) {
    throw Error(Errc::config_error, std::string("invalid experiment config: ") + e.what());
  }
  if (!c.module_dir.empty() && c.module_dir.is_relative()) c.module_dir = base_dir / c.module_dir;
  if (c.topology != "evaluation" && std::filesystem::path(c.topology).is_relative()) {
    c.topology = (base_dir / c.topology).string();
  }
  validate(c);
  return c;
}

ExperimentConfig load_experiment(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(Errc::config_error, "cannot read experiment config " + file.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::config_error, "malformed experiment config " + file.string() + ": " + e.what());
  }
  return experiment_from_json(doc, file.parent_path());
}

json to_json(const ExperimentConfig& c) {
  json doc{{"topology", c.topology},   {"module_id", c.module_id},     {"src", c.src},
           {"dst", c.dst},             {"packet_count", c.packet_count}, {"gap_ms", c.gap_ms},
           {"deadline_ms", c.deadline_ms}, {"k", c.k},                 {"rate_mbps", c.rate_mbps},
           {"app_id", c.app_id},       {"purchase", c.purchase},       {"jitter_ms", c.jitter_ms},
           {"output", c.output.string()}};
  if (!c.module_dir.empty()) doc["module_dir"] = c.module_dir.string();
  if (c.plot) doc["plot"] = c.plot->string();
  if (c.injection) {
    doc["injection"] = {{"link", c.injection->link},
                        {"extra_ms", to_ms(c.injection->extra)},
                        {"start_ms", to_ms(c.injection->start)},
                        {"end_ms", to_ms(c.injection->end)}};
  }
  return doc;
}

// -- running -----------------------------------------------------------------------

namespace {

netsim::Topology load_network(const ExperimentConfig& c) {
  return c.topology == "evaluation" ? netsim::evaluation_topology() : netsim::load_topology(c.topology);
}

std::vector<SimTime> send_times(const ExperimentConfig& c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto jitter = from_ms(c.jitter_ms).count();
  std::vector<SimTime> out;
  for (std::size_t i = 0; i < c.packet_count; ++i) {
    SimTime at = from_ms(c.gap_ms * static_cast<double>(i));
    if (jitter > 0) at += SimDuration{std::uniform_int_distribution<std::int64_t>(0, jitter)(rng)};
    out.push_back(at);
  }
  return out;
}

void fill_rows(ExperimentReport& r, const std::vector<SimTime>& sent, const std::vector<netsim::DeliveryRecord>& recs) {
  r.rows.assign(sent.size(), {});
  for (std::size_t i = 0; i < sent.size(); ++i) {
    r.rows[i].seq = i;
    r.rows[i].sent_at = sent[i];
    r.rows[i].latency.assign(static_cast<std::size_t>(r.paths), std::nullopt);
  }
  for (const auto& rec : recs) {
    if (rec.seq >= r.rows.size() || !rec.delivered) continue;
    r.rows[rec.seq].latency.at(static_cast<std::size_t>(rec.path_index)) = rec.latency;
  }
  for (auto& row : r.rows) {
    for (const auto& l : row.latency) {
      if (l && (!row.earliest || *l < *row.earliest)) row.earliest = l;
    }
    row.violated = row.earliest && *row.earliest > r.deadline;
  }
  r.stats = kmflash::collect_stats(recs, r.deadline);
}

ExperimentReport run_baseline(const ExperimentConfig& c, std::uint64_t seed) {
  netsim::Simulator sim(load_network(c));
  if (c.injection) sim.inject_latency(*c.injection);
  ExperimentReport r;
  r.mode = kBaseline;
  r.module_id = c.module_id;
  r.seed = seed;
  r.deadline = from_ms(c.deadline_ms);
  const netsim::FlowId flow{c.src, c.dst, "baseline"};
  const auto route = netsim::default_route(sim.topology(), c.src, c.dst);
  if (!route) throw Error(Errc::config_error, "no route from " + c.src + " to " + c.dst);
  sim.deploy_path(flow, 0, *route);
  const auto sent = send_times(c, seed);
  std::vector<netsim::DeliveryRecord> recs;
  for (std::size_t i = 0; i < sent.size(); ++i) {
    netsim::Packet p;
    p.flow = flow;
    p.seq = i;
    p.size_bytes = 1500;
    p.sent_at = sent[i];
    p.deadline = r.deadline;
    sim.send(std::move(p), [&recs](const netsim::DeliveryRecord& rec) { recs.push_back(rec); });
  }
  sim.run();
  fill_rows(r, sent, recs);
  return r;
}

ExperimentReport run_module(const ExperimentConfig& c, std::uint64_t seed) {
  netsim::Simulator sim(load_network(c));
  if (c.injection) sim.inject_latency(*c.injection);
  store::Store store(sim);
  const moduledef::ModulePackage pkg = moduledef::load_module_package(c.module_dir);
  if (pkg.manifest.module_id != c.module_id) {
    throw Error(Errc::config_error, "module_dir holds " + pkg.manifest.module_id + ", not " + c.module_id);
  }
  store.register_specialist(pkg.manifest.author);
  store.register_specialist("experiment-reviewer");
  store.submit_package(c.module_dir);
  store.start_review(c.module_id, "experiment-reviewer");
  store.review(c.module_id, store::ReviewDecision::accept, "experiment-reviewer");
  const std::string token = c.purchase ? store.purchase(c.app_id, c.module_id).token : std::string();

  auto device = [&](const std::string& host, int port) {
    dsa::DeviceConfig d;
    d.device_id = "device-" + host;
    d.app_id = c.app_id;
    const netsim::Node* node = sim.snapshot().find_node(host);
    if (!node) throw Error(Errc::config_error, "unknown host " + host);
    for (int nic = 0; nic < std::max(1, node->nic_count); ++nic) d.connectivity.push_back({host, port, nic});
    d.static_hosts = {{"peer", {c.dst, 6000, 0}}};
    return d;
  };
  dsa::LocalChannel channel(store);
  dsa::Dsa receiver(device(c.dst, 6000), channel, sim);
  dsa::Dsa sender(device(c.src, 5000), channel, sim);
  receiver.bind("peer");

  dsa::ConnectOptions opts;
  opts.k = c.k;
  opts.rate_mbps = c.rate_mbps;
  opts.max_latency_ms = c.deadline_ms;
  const dsa::Connection conn = *sender.connect("peer", c.module_id, token, opts);

  ExperimentReport r;
  r.mode = conn.mode == dsa::ConnectionMode::module ? "module" : "fallback";
  r.module_id = c.module_id;
  r.failure_reason = conn.failure_reason;
  r.instance_id = conn.instance_id;
  r.seed = seed;
  r.paths = conn.paths;
  r.deadline = from_ms(c.deadline_ms);
  const auto sent = send_times(c, seed);
  std::vector<netsim::DeliveryRecord> recs;
  for (std::size_t i = 0; i < sent.size(); ++i) {
    sender.post(conn, "pkt-" + std::to_string(i), sent[i], r.deadline,
                [&recs](const netsim::DeliveryRecord& rec) { recs.push_back(rec); });
  }
  sim.run();
  fill_rows(r, sent, recs);
  if (conn.instance_id) r.cost = store::to_json(store.cost(*conn.instance_id));
  sender.close(conn);
  return r;
}

std::string cell(const std::optional<SimDuration>& d) { return d ? format_ms(*d) : std::string(); }

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config, std::uint64_t seed) {
  validate(config);
  return config.baseline() ? run_baseline(config, seed) : run_module(config, seed);
}

// -- output ------------------------------------------------------------------------

std::string to_csv(const ExperimentReport& r) {
  const int columns = std::max(2, r.paths);
  std::ostringstream out;
  out << "seq,sent_at_ms";
  for (int i = 0; i < columns; ++i) out << ",latency_path" << i << "_ms";
  out << ",earliest_ms,violated\n";
  for (const auto& row : r.rows) {
    out << row.seq << ',' << format_ms(row.sent_at - SimTime{0});
    for (int i = 0; i < columns; ++i) {
      // Single-copy runs leave the per-path columns empty.
      const bool show = r.mode == "module" && i < static_cast<int>(row.latency.size());
      out << ',' << (show ? cell(row.latency[static_cast<std::size_t>(i)]) : std::string());
    }
    out << ',' << cell(row.earliest) << ',' << (row.violated ? 1 : 0) << '\n';
  }
  return out.str();
}

json summary_json(const ExperimentReport& r) {
  json doc{{"mode", r.mode},
           {"module_id", r.module_id},
           {"seed", r.seed},
           {"paths", r.paths},
           {"deadline_ms", to_ms(r.deadline)},
           {"packets", r.rows.size()},
           {"sent", r.stats.sent},
           {"delivered_unique", r.stats.delivered_unique},
           {"losses", r.stats.losses},
           {"deadline_violations", r.stats.deadline_violations},
           {"in_deadline_ratio", r.stats.in_deadline_ratio}};
  if (r.failure_reason) doc["failure_reason"] = *r.failure_reason;
  if (r.instance_id) doc["instance_id"] = *r.instance_id;
  if (!r.cost.is_null()) doc["cost"] = r.cost;
  return doc;
}

std::string summary_text(const ExperimentReport& r) {
  std::ostringstream out;
  out << "mode: " << r.mode << '\n';
  if (r.failure_reason) out << "failure_reason: " << *r.failure_reason << '\n';
  out << "packets: " << r.rows.size() << '\n'
      << "delivered: " << r.stats.delivered_unique << '\n'
      << "losses: " << r.stats.losses << '\n'
      << "deadline_violations: " << r.stats.deadline_violations << '\n'
      << "in_deadline_ratio: " << r.stats.in_deadline_ratio << '\n';
  if (!r.cost.is_null()) out << "cost_raw_total: " << r.cost.value("raw_total", 0.0) << '\n';
  return out.str();
}

std::string to_svg(const ExperimentReport& r) {
  constexpr double kW = 640, kH = 360, kPad = 48;
  double max_t = 1.0, max_l = to_ms(r.deadline);
  for (const auto& row : r.rows) {
    max_t = std::max(max_t, to_ms(row.sent_at - SimTime{0}));
    for (const auto& l : row.latency) {
      if (l) max_l = std::max(max_l, to_ms(*l));
    }
  }
  max_l *= 1.1;
  auto x = [&](double t) { return kPad + t / max_t * (kW - 2 * kPad); };
  auto y = [&](double l) { return kH - kPad - l / max_l * (kH - 2 * kPad); };
  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd"};

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<line x1=\"" << kPad << "\" y1=\"" << kH - kPad << "\" x2=\"" << kW - kPad << "\" y2=\"" << kH - kPad
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << kPad << "\" y1=\"" << kPad << "\" x2=\"" << kPad << "\" y2=\"" << kH - kPad
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << kPad << "\" y1=\"" << y(to_ms(r.deadline)) << "\" x2=\"" << kW - kPad << "\" y2=\""
      << y(to_ms(r.deadline)) << "\" stroke=\"red\" stroke-dasharray=\"4\"/>\n"
      << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\">send time (ms)</text>\n"
      << "<text x=\"14\" y=\"" << kH / 2 << "\" transform=\"rotate(-90 14 " << kH / 2
      << ")\" text-anchor=\"middle\">latency (ms)</text>\n";
  const std::size_t paths = r.rows.empty() ? 0 : r.rows.front().latency.size();
  for (std::size_t p = 0; p < paths; ++p) {
    out << "<polyline fill=\"none\" stroke=\"" << colors[p % 4] << "\" points=\"";
    for (const auto& row : r.rows) {
      if (row.latency[p]) out << x(to_ms(row.sent_at - SimTime{0})) << ',' << y(to_ms(*row.latency[p])) << ' ';
    }
    out << "\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void write_outputs(const ExperimentReport& report, const ExperimentConfig& config) {
  auto write = [](const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
    out << text;
  };
  write(config.output, to_csv(report));
  auto summary = config.output;
  summary.replace_extension(".summary.json");
  write(summary, summary_json(report).dump(2) + "\n");
  if (config.plot) write(*config.plot, to_svg(report));
}

}  // namespace socketstore::cli
