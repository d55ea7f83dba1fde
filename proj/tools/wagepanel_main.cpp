// SPDX-License-Identifier: Apache-2.0
// Copyright The wagepanel Authors.

#include <csignal>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "wagepanel/explorer.hpp"
#include "wagepanel/pipeline.hpp"

namespace {

wagepanel::ExplorerServer* g_server = nullptr;

void handle_signal(int) {
  if (g_server) g_server->stop();
}

int serve(const wagepanel::PipelineConfig& config, const std::string& host) {
  auto service = wagepanel::ExplorerService::open(config);
  wagepanel::ExplorerServer server(*service, config.ui_dir);
  const int port = server.bind(host, config.port);
  if (port < 0) {
    std::cerr << "error: cannot bind " << host << ":" << config.port << "\n";
    return 2;
  }
  g_server = &server;
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  std::cout << "serving " << service->individuals() << " individuals on http://" << host << ":"
            << port << std::endl;
  server.listen();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tidy, screen and repair NLSY79 wage panels"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "key = value settings file")->check(CLI::ExistingFile);

  std::map<std::string, std::optional<std::string>> overrides;
  for (const auto& key : wagepanel::config_keys()) {
    overrides[key.name];
    app.add_option("--" + key.name, overrides[key.name], key.help);
  }

  std::string host = "127.0.0.1";
  std::optional<wagepanel::Stage> stage;
  bool run_everything = false, run_serve = false;

  for (auto s : {wagepanel::Stage::kIngest, wagepanel::Stage::kTidy, wagepanel::Stage::kValidate,
                 wagepanel::Stage::kRepair, wagepanel::Stage::kSubset, wagepanel::Stage::kCompare,
                 wagepanel::Stage::kAdjust}) {
    auto* sub = app.add_subcommand(std::string(wagepanel::stage_name(s)),
                                   "run the " + std::string(wagepanel::stage_name(s)) + " stage");
    sub->callback([&stage, s] { stage = s; });
  }
  app.add_subcommand("all", "run every stage in order")->callback([&] { run_everything = true; });
  auto* serve_cmd = app.add_subcommand("serve", "serve the threshold explorer API");
  serve_cmd->add_option("--host", host, "listen address");
  serve_cmd->callback([&] { run_serve = true; });

  CLI11_PARSE(app, argc, argv);

  try {
    wagepanel::PipelineConfig config;
    if (!config_path.empty()) config = wagepanel::load_config(config_path);
    for (const auto& key : wagepanel::config_keys()) {
      if (const auto& v = overrides[key.name]) {
        wagepanel::apply_config_value(config, key.name, *v, {});
      }
    }
    config.repair.validate();

    if (run_serve) return serve(config, host);

    const wagepanel::StageOutcome outcome =
        run_everything ? wagepanel::run_all(config) : wagepanel::run_stage(*stage, config);
    std::cout << outcome.message;
    if (!outcome.message.empty() && outcome.message.back() != '\n') std::cout << "\n";
    return outcome.ok ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
