#include "socketstore/cli/commands.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>

#include "socketstore/cli/experiment.hpp"
#include "socketstore/error.hpp"
#include "socketstore/moduledef/manifest.hpp"
#include "socketstore/netsim/topology_io.hpp"
#include "socketstore/store/action_log.hpp"
#include "socketstore/store/server.hpp"
#include "socketstore/store/store.hpp"

namespace socketstore::cli {

using nlohmann::json;
using moduledef::ModuleState;

const std::vector<CommandInfo>& command_table() {
  static const std::vector<CommandInfo> table = {
      {"register-specialist", "register_specialist", "register a Network Specialist"},
      {"register-metric", "register_metric", "register a metric definition file"},
      {"submit", "submit", "submit a module package directory"},
      {"review", "review", "--start, --accept or --revise a module"},
      {"review", "start_review", "--start moves submitted to in_review"},
      {"publish", "review", "accept an in-review module"},
      {"revise", "revise", "replace a module with a revised package"},
      {"retire", "retire", "retire a published module"},
      {"show", "module", "print one manifest"},
      {"modules", "modules", "list every module and its state"},
      {"search", "search", "search published modules"},
      {"scenarios", "scenarios", "list testbed scenarios"},
      {"eval", "evaluate", "run a module on a testbed scenario"},
      {"samples", "samples", "list a module's metric samples"},
      {"purchase", "purchase", "buy a license, prints the token"},
      {"revoke", "revoke", "revoke a license token"},
      {"authorize", "authorize", "check a token against a module"},
      {"instantiate", "instantiate", "instantiate a module in production"},
      {"cost", "cost", "print an instance's cost report"},
      {"teardown", "teardown", "destroy an instance"},
      {"instances", "instances", "list instances"},
      {"bind", "bind_alias", "register an alias for a device"},
      {"resolve", "resolve_alias", "print an alias's endpoints"},
      {"log", "read_log", "print the action log"},
      {"library", "library", "list the agent type library"},
      {"serve", "", "serve the wire protocol over TCP"},
      {"run-experiment", "", "run an experiment config, write CSV and summary"},
  };
  return table;
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("SOCKETSTORE_DATA"); env && *env) return env;
  return "socketstore-data";
}

namespace {

/// Store opened lazily over the data directory.
class Session {
 public:
  explicit Session(std::filesystem::path dir) : dir_(std::move(dir)) {}

  store::Store& store() {
    if (!store_) {
      std::filesystem::create_directories(dir_);
      const auto topo_file = dir_ / "topology.json";
      sim_ = std::make_unique<netsim::Simulator>(std::filesystem::exists(topo_file) ? netsim::load_topology(topo_file)
                                                                                   : netsim::evaluation_topology());
      store::StoreConfig config;
      config.state_file = dir_ / "state.json";
      store_ = store::Store::open(*sim_, config);
    }
    return *store_;
  }

  std::filesystem::path& dir() { return dir_; }

 private:
  std::filesystem::path dir_;
  std::unique_ptr<netsim::Simulator> sim_;
  std::unique_ptr<store::Store> store_;
};

/// The only module in `state` when no id was given.
std::string pick_module(store::Store& s, const std::string& given, ModuleState state) {
  if (!given.empty()) return given;
  std::vector<std::string> ids;
  const auto all = s.modules();
  for (const auto& m : all) {
    if (m.state == state) ids.push_back(m.module_id);
  }
  // A lone module is picked whatever its state, so the store reports the real error.
  if (ids.empty() && all.size() == 1) return all.front().module_id;
  if (ids.size() != 1) {
    throw Error(Errc::invalid_argument, std::string("name the module: ") + std::to_string(ids.size()) +
                                            " modules are " + moduledef::to_string(state));
  }
  return ids.front();
}

json manifest_summary(const moduledef::ModuleManifest& m) {
  return {{"module_id", m.module_id}, {"name", m.name},   {"version", m.version},
          {"author", m.author},       {"state", moduledef::to_string(m.state)}, {"price", m.price}};
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Socket store: publish, buy and run network modules"};
  app.require_subcommand(1);
  std::string data_dir = default_data_dir().string();
  app.add_option("--data", data_dir, "store data directory (default $SOCKETSTORE_DATA)");
  Session session{""};
  std::function<void()> action;

  auto command = [&](const std::string& name, const std::string& help) {
    CLI::App* sub = app.get_subcommand_no_throw(name);
    return sub ? sub : app.add_subcommand(name, help);
  };

  std::string id, text, reviewer = "reviewer", path;
  {
    auto* c = command("register-specialist", "register a Network Specialist");
    c->add_option("id", id)->required();
    c->callback([&] { action = [&] { session.store().register_specialist(id); out << id << '\n'; }; });
  }
  {
    auto* c = command("register-metric", "register a metric definition file");
    c->add_option("file", path)->required()->check(CLI::ExistingFile);
    c->callback([&] {
      action = [&] {
        std::ifstream in(path);
        const auto metric = moduledef::metric_from_json(json::parse(in));
        session.store().register_metric(metric);
        out << metric.metric_id << '\n';
      };
    });
  }
  {
    auto* c = command("submit", "submit a module package directory");
    c->add_option("dir", path)->required()->check(CLI::ExistingDirectory);
    c->callback([&] { action = [&] { out << session.store().submit_package(path) << '\n'; }; });
  }
  bool start = false, accept = false, revise = false;
  {
    auto* c = command("review", "--start, --accept or --revise a module");
    c->add_option("module", id);
    auto* g = c->add_option_group("decision");
    g->add_flag("--start", start, "submitted -> in_review");
    g->add_flag("--accept", accept, "in_review -> published");
    g->add_flag("--revise", revise, "in_review -> revision_requested");
    g->require_option(1);
    c->add_option("--reviewer", reviewer, "reviewing Specialist");
    c->callback([&] {
      action = [&] {
        auto& s = session.store();
        ModuleState to;
        if (start) {
          to = s.start_review(pick_module(s, id, ModuleState::submitted), reviewer);
        } else {
          // An explicit id may be in any state; the store rejects illegal moves.
          const std::string mid = pick_module(s, id, ModuleState::in_review);
          to = s.review(mid, accept ? store::ReviewDecision::accept : store::ReviewDecision::revise, reviewer);
        }
        out << moduledef::to_string(to) << '\n';
      };
    });
  }
  {
    auto* c = command("publish", "accept an in-review module");
    c->add_option("module", id);
    c->add_option("--reviewer", reviewer, "reviewing Specialist");
    c->callback([&] {
      action = [&] {
        auto& s = session.store();
        out << moduledef::to_string(
                   s.review(pick_module(s, id, ModuleState::in_review), store::ReviewDecision::accept, reviewer))
            << '\n';
      };
    });
  }
  {
    auto* c = command("revise", "replace a module with a revised package");
    c->add_option("dir", path)->required()->check(CLI::ExistingDirectory);
    c->callback([&] {
      action = [&] {
        auto pkg = moduledef::load_module_package(path);
        for (const auto& m : pkg.metrics) {
          if (!session.store().metrics().count(m.metric_id)) session.store().register_metric(m);
        }
        out << moduledef::to_string(session.store().revise(std::move(pkg.manifest))) << '\n';
      };
    });
  }
  {
    auto* c = command("retire", "retire a published module");
    c->add_option("module", id)->required();
    c->callback([&] { action = [&] { out << moduledef::to_string(session.store().retire(id)) << '\n'; }; });
  }
  {
    auto* c = command("show", "print one manifest");
    c->add_option("module", id)->required();
    c->callback([&] { action = [&] { out << moduledef::to_json(session.store().module(id)).dump(2) << '\n'; }; });
  }
  {
    auto* c = command("modules", "list every module and its state");
    c->callback([&] {
      action = [&] {
        for (const auto& m : session.store().modules()) out << manifest_summary(m).dump() << '\n';
      };
    });
  }
  {
    auto* c = command("search", "search published modules");
    c->add_option("query", text);
    c->callback([&] {
      action = [&] {
        for (const auto& r : session.store().search(text)) {
          json row{{"module_id", r.module_id}, {"name", r.name},     {"version", r.version},
                   {"price", r.price},         {"metric", r.metric_id}, {"aggregate", nullptr}};
          if (r.aggregate) row["aggregate"] = *r.aggregate;
          out << row.dump() << '\n';
        }
      };
    });
  }
  {
    auto* c = command("scenarios", "list testbed scenarios");
    c->callback([&] {
      action = [&] {
        for (const auto& n : session.store().scenarios().names()) out << n << '\n';
      };
    });
  }
  std::string scenario = "latency-spike";
  {
    auto* c = command("eval", "run a module on a testbed scenario");
    c->add_option("module", id)->required();
    c->add_option("--scenario", scenario, "testbed scenario");
    c->callback([&] {
      action = [&] {
        for (const auto& s : session.store().evaluate(id, scenario)) out << store::to_json(s).dump() << '\n';
      };
    });
  }
  {
    auto* c = command("samples", "list a module's metric samples");
    c->add_option("module", id)->required();
    c->callback([&] {
      action = [&] {
        for (const auto& s : session.store().samples(id)) out << store::to_json(s).dump() << '\n';
      };
    });
  }
  std::string app_id, token;
  {
    auto* c = command("purchase", "buy a license, prints the token");
    c->add_option("--app", app_id)->required();
    c->add_option("--module", id)->required();
    c->callback([&] { action = [&] { out << session.store().purchase(app_id, id).token << '\n'; }; });
  }
  {
    auto* c = command("revoke", "revoke a license token");
    c->add_option("token", token)->required();
    c->callback([&] {
      action = [&] {
        if (!session.store().revoke(token)) throw Error(Errc::access_denied, "unknown or already revoked token");
        out << "revoked\n";
      };
    });
  }
  {
    auto* c = command("authorize", "check a token against a module");
    c->add_option("--token", token)->required();
    c->add_option("--module", id)->required();
    c->callback([&] {
      action = [&] {
        if (!session.store().authorize(token, id)) throw Error(Errc::access_denied, "authorization denied");
        out << "allow\n";
      };
    });
  }
  std::vector<std::string> inputs;
  {
    auto* c = command("instantiate", "instantiate a module in production");
    c->add_option("--token", token)->required();
    c->add_option("--module", id)->required();
    c->add_option("--input", inputs, "formal input as name=value");
    c->callback([&] {
      action = [&] {
        std::map<std::string, std::string> bound;
        for (const auto& kv : inputs) {
          const auto eq = kv.find('=');
          if (eq == std::string::npos) throw Error(Errc::invalid_argument, "input must be name=value: " + kv);
          bound[kv.substr(0, eq)] = kv.substr(eq + 1);
        }
        const auto r = session.store().instantiate(token, id, bound);
        if (!r.ok) throw Error(Errc::spawn_failure, r.reason);
        out << r.instance_id << '\n' << r.allocation.dump() << '\n';
      };
    });
  }
  {
    auto* c = command("cost", "print an instance's cost report");
    c->add_option("instance", id)->required();
    c->callback([&] { action = [&] { out << store::to_json(session.store().cost(id)).dump(2) << '\n'; }; });
  }
  {
    auto* c = command("teardown", "destroy an instance");
    c->add_option("instance", id)->required();
    c->callback([&] { action = [&] { session.store().teardown(id); out << "torn down\n"; }; });
  }
  {
    auto* c = command("instances", "list instances");
    c->callback([&] {
      action = [&] {
        for (const auto& i : session.store().instances()) {
          out << json{{"instance_id", i.instance_id},
                      {"module_id", i.module_id},
                      {"app_id", i.app_id},
                      {"live", !i.ended_at.has_value()}}
                     .dump()
              << '\n';
        }
      };
    });
  }
  std::string device;
  std::vector<std::string> endpoints;
  {
    auto* c = command("bind", "register an alias for a device");
    c->add_option("--alias", text)->required();
    c->add_option("--device", device)->required();
    c->add_option("--endpoint", endpoints, "address:port[/nic]")->required();
    c->callback([&] {
      action = [&] {
        std::vector<Endpoint> eps;
        for (const auto& e : endpoints) eps.push_back(parse_endpoint(e));
        session.store().bind_alias(text, device, eps);
        out << "bound\n";
      };
    });
  }
  {
    auto* c = command("resolve", "print an alias's endpoints");
    c->add_option("alias", text)->required();
    c->callback([&] {
      action = [&] {
        auto eps = session.store().resolve_alias(text);
        if (!eps) throw Error(Errc::invalid_argument, "unknown alias: " + text);
        for (const auto& e : *eps) out << to_string(e) << '\n';
      };
    });
  }
  std::optional<std::string> actor;
  std::optional<double> from_ms_opt, to_ms_opt;
  {
    auto* c = command("log", "print the action log");
    c->add_option("--actor", actor);
    c->add_option("--from-ms", from_ms_opt);
    c->add_option("--to-ms", to_ms_opt);
    c->callback([&] {
      action = [&] {
        store::LogFilter f;
        f.actor = actor;
        if (from_ms_opt) f.from = SimTime{from_ms(*from_ms_opt)};
        if (to_ms_opt) f.to = SimTime{from_ms(*to_ms_opt)};
        for (const auto& e : session.store().read_log(f)) out << store::to_json(e).dump() << '\n';
      };
    });
  }
  {
    auto* c = command("library", "list the agent type library");
    c->callback([&] {
      action = [&] {
        const auto& lib = session.store().library();
        for (const auto& n : lib.type_names()) {
          out << n << "  " << agents::to_string(lib.at(n).kind) << "  " << lib.at(n).doc << '\n';
        }
      };
    });
  }
  std::string host = "127.0.0.1";
  std::uint16_t port = 7400;
  {
    auto* c = command("serve", "serve the wire protocol over TCP");
    c->add_option("--host", host);
    c->add_option("--port", port);
    c->callback([&] {
      action = [&] {
        store::TcpServer server(session.store(), host, port);
        out << "listening on " << host << ':' << server.port() << std::endl;
        server.run();
      };
    });
  }
  std::uint64_t seed = 1;
  bool baseline = false;
  std::string output, plot;
  {
    auto* c = command("run-experiment", "run an experiment config, write CSV and summary");
    c->add_option("config", path)->required()->check(CLI::ExistingFile);
    c->add_option("--seed", seed, "RNG seed (send jitter)");
    c->add_flag("--baseline", baseline, "run the plain default-route baseline");
    c->add_option("--output", output, "CSV path, overrides the config");
    c->add_option("--plot", plot, "SVG plot path, overrides the config");
    c->callback([&] {
      action = [&] {
        ExperimentConfig config = load_experiment(path);
        if (baseline) config.module_id = kBaseline;
        if (!output.empty()) config.output = output;
        if (!plot.empty()) config.plot = plot;
        const ExperimentReport report = run_experiment(config, seed);
        write_outputs(report, config);
        out << summary_text(report) << "csv: " << config.output.string() << '\n';
      };
    });
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  }
  session.dir() = data_dir;
  try {
    if (action) action();
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace socketstore::cli
