#include <stdexcept>

#include "hypertest/covdb.hpp"

#include "httplib.h"

namespace hypertest {

struct ApiServer::Impl {
  httplib::Server srv;
};

ApiServer::ApiServer(const CoverageApi& api, const std::string& static_dir) : impl_(std::make_unique<Impl>()) {
  impl_->srv.Get(R"(/api/.*)", [&api](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query.emplace(k, v);
    ApiResponse r = api.get(req.path, query);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  });
  if (!static_dir.empty() && !impl_->srv.set_mount_point("/", static_dir))
    throw std::invalid_argument("cannot serve static directory " + static_dir);
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->srv.bind_to_any_port(host);
  return impl_->srv.bind_to_port(host, port) ? port : -1;
}

bool ApiServer::listen() { return impl_->srv.listen_after_bind(); }

void ApiServer::stop() {
  if (impl_) impl_->srv.stop();
}

}  // namespace hypertest
