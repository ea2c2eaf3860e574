#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "xaip/plant/plant.hpp"
#include "xaip/service/manager.hpp"

namespace httplib {
class Server;
}

namespace xaip::service {

inline constexpr const char* kServiceSchema = "xaip.service/1";

struct ServerOptions {
  std::string host = "0.0.0.0";
  int port = 8080;
  std::filesystem::path tree_path;
  xai::XaiMode mode = xai::XaiMode::UserAware;
  std::filesystem::path catalog_path;  // empty: bundled catalog
  std::filesystem::path journal_dir = "journals";
  plant::PlantConfig plant;
  std::optional<double> accuracy;  // empty: agreement with the scripted expert

  void validate() const;
};

ServerOptions server_options_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});

using EnvLookup = std::function<const char*(const char*)>;

/// XAIP_PORT, XAIP_TREE, XAIP_MODE and XAIP_STEP_SECONDS override the file.
void apply_env_overrides(ServerOptions& options, const EnvLookup& lookup);

/// Config file, then environment, then the explicit flags (when non-empty).
ServerOptions load_server_options(const std::string& config_path, const std::string& tree_flag,
                                  const std::string& mode_flag);

std::shared_ptr<const SessionEnvironment> make_environment(const ServerOptions& options);

/// Registers the /v1 HTTP routes and the server-sent event stream.
void install_routes(httplib::Server& server, SessionManager& manager);

/// Serves until SIGINT or SIGTERM.
int run_server(const ServerOptions& options);

}  // namespace xaip::service
