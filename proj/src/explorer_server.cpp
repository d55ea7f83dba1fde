// SPDX-License-Identifier: Apache-2.0
// Copyright The wagepanel Authors.

#include <httplib.h>

#include "wagepanel/explorer.hpp"

namespace wagepanel {
namespace {

QueryParams query_params(const httplib::Request& req) {
  QueryParams out;
  for (const auto& [key, value] : req.params) out.emplace(key, value);
  return out;
}

void send(httplib::Response& res, const ApiResponse& api) {
  res.status = api.status;
  res.set_content(api.body.dump(), "application/json");
}

}  // namespace

struct ExplorerServer::Impl {
  ExplorerService& service;
  httplib::Server server;

  explicit Impl(ExplorerService& s) : service(s) {}
};

ExplorerServer::ExplorerServer(ExplorerService& service, const std::filesystem::path& ui_dir)
    : impl_(std::make_unique<Impl>(service)) {
  auto& srv = impl_->server;
  srv.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                           {"Access-Control-Allow-Headers", "Content-Type"}});
  srv.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  ExplorerService* svc = &service;
  srv.Get("/meta", [svc](const httplib::Request&, httplib::Response& res) { send(res, svc->meta()); });
  srv.Get("/sample", [svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc->sample(query_params(req)));
  });
  srv.Get("/repair", [svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc->repair(query_params(req)));
  });
  srv.Get("/sweep", [svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc->sweep(query_params(req)));
  });
  srv.Post("/threshold", [svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc->post_threshold(req.body));
  });
  srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    send(res, {500, {{"error", what}}});
  });
  if (!ui_dir.empty() && !srv.set_mount_point("/", ui_dir.string())) {
    throw Error("cannot serve ui directory " + ui_dir.string());
  }
}

ExplorerServer::~ExplorerServer() = default;

int ExplorerServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool ExplorerServer::listen() { return impl_->server.listen_after_bind(); }

void ExplorerServer::stop() { impl_->server.stop(); }

void ExplorerServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace wagepanel
