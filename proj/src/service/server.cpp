#include "xaip/service/server.hpp"

#include <csignal>
#include <fstream>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>

#include "xaip/errors.hpp"
#include "xaip/metrics/catalog.hpp"
#include "xaip/plant/plant_io.hpp"
#include "xaip/policy/expert.hpp"
#include "xaip/policy/tree_io.hpp"

namespace xaip::service {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

void ServerOptions::validate() const {
  if (port < 0 || port > 65535) throw ConfigError(fmt::format("port {} out of range", port));
  if (tree_path.empty()) throw ConfigError("no tree file given (--tree, XAIP_TREE or \"tree\")");
  if (accuracy && !(*accuracy >= 0.0 && *accuracy <= 1.0)) throw ConfigError("accuracy must be in [0, 1]");
  plant.validate();
}

ServerOptions server_options_from_json(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("service config must be a JSON object");
  ServerOptions o;
  auto resolve = [&](const json& v) {
    fs::path p(v.get<std::string>());
    return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  };
  std::optional<double> step_seconds;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "schema") {
        if (value != kServiceSchema) throw ConfigError(fmt::format("unsupported service schema {}", value.dump()));
      } else if (key == "host") o.host = value.get<std::string>();
      else if (key == "port") o.port = value.get<int>();
      else if (key == "tree") o.tree_path = resolve(value);
      else if (key == "catalog") o.catalog_path = resolve(value);
      else if (key == "journal_dir") o.journal_dir = resolve(value);
      else if (key == "plant") o.plant = plant::config_from_json(value);
      else if (key == "step_seconds") step_seconds = value.get<double>();
      else if (key == "accuracy") o.accuracy = value.is_null() ? std::nullopt : std::optional<double>(value.get<double>());
      else if (key == "mode") {
        auto m = xai::mode_from_name(value.get<std::string>());
        if (!m) throw ConfigError(fmt::format("unknown mode {}", value.dump()));
        o.mode = *m;
      } else {
        throw ConfigError(fmt::format("unknown service config key '{}'", key));
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("malformed service config: {}", e.what()));
  }
  if (step_seconds) o.plant.step_seconds = *step_seconds;
  return o;
}

void apply_env_overrides(ServerOptions& o, const EnvLookup& lookup) {
  if (const char* v = lookup("XAIP_PORT")) {
    try {
      o.port = std::stoi(v);
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("XAIP_PORT is not a number: '{}'", v));
    }
  }
  if (const char* v = lookup("XAIP_TREE")) o.tree_path = v;
  if (const char* v = lookup("XAIP_MODE")) {
    auto m = xai::mode_from_name(v);
    if (!m) throw ConfigError(fmt::format("XAIP_MODE must be classical or user-aware, got '{}'", v));
    o.mode = *m;
  }
  if (const char* v = lookup("XAIP_STEP_SECONDS")) {
    try {
      o.plant.step_seconds = std::stod(v);
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("XAIP_STEP_SECONDS is not a number: '{}'", v));
    }
  }
}

ServerOptions load_server_options(const std::string& config_path, const std::string& tree_flag,
                                  const std::string& mode_flag) {
  ServerOptions o;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw ConfigError(fmt::format("cannot open {}", config_path));
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError(fmt::format("{}: {}", config_path, e.what()));
    }
    o = server_options_from_json(doc, fs::path(config_path).parent_path());
  }
  apply_env_overrides(o, [](const char* name) { return std::getenv(name); });
  if (!tree_flag.empty()) o.tree_path = tree_flag;
  if (!mode_flag.empty()) {
    auto m = xai::mode_from_name(mode_flag);
    if (!m) throw ConfigError(fmt::format("--mode must be classical or user-aware, got '{}'", mode_flag));
    o.mode = *m;
  }
  o.validate();
  return o;
}

std::shared_ptr<const SessionEnvironment> make_environment(const ServerOptions& o) {
  auto env = std::make_shared<SessionEnvironment>();
  auto tree = std::make_shared<policy::DecisionTreePolicy>(policy::load_tree(o.tree_path));
  env->plant = o.plant;
  env->accuracy = o.accuracy ? *o.accuracy : policy::expert_agreement(*tree, o.plant);
  env->tree = std::move(tree);
  const fs::path catalog = o.catalog_path.empty() ? fs::path(XAIP_DATA_DIR) / "rule_catalog.json" : o.catalog_path;
  env->catalog = std::make_shared<metrics::RuleCatalog>(metrics::load_catalog(catalog));
  return env;
}

namespace {

void send_json(httplib::Response& res, const ordered_json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const ProtocolError& e) {
  send_json(res, ordered_json{{"error", e.to_json()}}, http_status(e.code()));
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    auto j = json::parse(req.body);
    if (!j.is_object()) throw ProtocolError(ErrorCode::InvalidPayload, "request body must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw ProtocolError(ErrorCode::InvalidPayload, fmt::format("malformed JSON: {}", e.what()));
  }
}

// Runs `fn`, mapping protocol errors to their HTTP status and body.
template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const ProtocolError& e) {
      send_error(res, e);
    }
  };
}

}  // namespace

void install_routes(httplib::Server& server, SessionManager& manager) {
  auto* mgr = &manager;

  server.set_post_routing_handler([](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
  });
  server.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });

  server.Get("/v1/health", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, ordered_json{{"status", "ok"}});
  });

  server.Post("/v1/sessions", guarded([mgr](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    std::optional<xai::XaiMode> mode;
    if (auto it = body.find("mode"); it != body.end()) {
      if (it->is_string()) mode = xai::mode_from_name(it->get<std::string>());
      if (!mode) throw ProtocolError(ErrorCode::InvalidPayload, "mode must be classical or user-aware");
    }
    const auto id = mgr->create(mode);
    send_json(res, ordered_json{{"session_id", id}, {"state", mgr->state(id)}}, 201);
  }));

  server.Get("/v1/sessions/:id/state", guarded([mgr](const httplib::Request& req, httplib::Response& res) {
    send_json(res, mgr->state(req.path_params.at("id")));
  }));

  for (const char* op : {"start", "what", "why"}) {
    server.Post(fmt::format("/v1/sessions/:id/{}", op),
                guarded([mgr, op = std::string(op)](const httplib::Request& req, httplib::Response& res) {
                  parse_body(req);
                  send_json(res, mgr->command(req.path_params.at("id"), json{{"op", op}}));
                }));
  }

  server.Post("/v1/sessions/:id/action", guarded([mgr](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    json command{{"op", "act"}};
    if (auto it = body.find("action"); it != body.end()) command["action"] = *it;
    send_json(res, mgr->command(req.path_params.at("id"), command));
  }));

  server.Get("/v1/sessions/:id/quiz", guarded([mgr](const httplib::Request& req, httplib::Response& res) {
    send_json(res, mgr->quiz_sheet(req.path_params.at("id")));
  }));

  server.Post("/v1/sessions/:id/quiz", guarded([mgr](const httplib::Request& req, httplib::Response& res) {
    auto body = parse_body(req);
    json command{{"op", "quiz"}, {"answers", body.value("answers", json())}};
    if (body.contains("questionnaire")) command["questionnaire"] = body["questionnaire"];
    send_json(res, mgr->command(req.path_params.at("id"), command));
  }));

  server.Get("/v1/sessions/:id/report", guarded([mgr](const httplib::Request& req, httplib::Response& res) {
    send_json(res, mgr->report(req.path_params.at("id")));
  }));

  // Server-sent events: the current state, then one StateUpdate per change.
  server.Get("/v1/sessions/:id/events", guarded([mgr](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.path_params.at("id");
    auto seen = std::make_shared<std::uint64_t>(mgr->version(id));
    auto first = std::make_shared<bool>(true);
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider("text/event-stream", [mgr, id, seen, first](std::size_t, httplib::DataSink& sink) {
      auto emit = [&](const ordered_json& update) {
        const auto msg = fmt::format("event: state\ndata: {}\n\n", update.dump());
        return sink.write(msg.data(), msg.size());
      };
      try {
        if (*first) {
          *first = false;
          return emit(mgr->state(id));
        }
        auto update = mgr->wait_update(id, *seen, std::chrono::milliseconds(1000));
        if (!update) {
          static constexpr char kKeepAlive[] = ": keep-alive\n\n";
          return sink.write(kKeepAlive, sizeof(kKeepAlive) - 1);
        }
        *seen = update->first;
        if (!emit(update->second)) return false;
        if (update->second["phase"] == "done") sink.done();
        return true;
      } catch (const ProtocolError&) {
        sink.done();
        return true;
      }
    });
  }));
}

int run_server(const ServerOptions& options) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  SessionManager manager(make_environment(options), options.mode, options.journal_dir);
  const std::size_t restored = manager.recover();

  httplib::Server server;
  server.new_task_queue = [] { return new httplib::ThreadPool(32); };
  install_routes(server, manager);

  std::atomic<bool> running{true};
  std::thread ticker([&] {
    while (running) {
      manager.tick();
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
  });
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    running = false;
    server.stop();
  });

  fmt::print("serving {} mode on {}:{} (restored {} sessions, journals in {})\n", xai::mode_name(options.mode),
             options.host, options.port, restored, options.journal_dir.string());
  std::fflush(stdout);
  const bool ok = server.listen(options.host, options.port);
  running = false;
  if (!ok) {
    fmt::print(stderr, "error: cannot listen on {}:{}\n", options.host, options.port);
    ticker.join();
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    return 1;
  }
  ticker.join();
  waiter.join();
  return 0;
}

}  // namespace xaip::service
