// cpp-httplib is confined to this translation unit.
#include <httplib.h>

#include <thread>

#include "pirax/client.hpp"
#include "pirax/service.hpp"

namespace pirax {
namespace {

void route(httplib::Server& server, ProviderService& service) {
  auto handler = [&service](const httplib::Request& req, httplib::Response& res) {
    HttpResponse out = service.handle(req.method, req.path, req.body);
    res.status = out.status;
    res.set_content(out.body, "application/json");
  };
  server.Get(R"(/.*)", handler);
  server.Post(R"(/.*)", handler);
}

}  // namespace

struct HttpServer::Impl {
  httplib::Server server;
  std::thread thread;
};

HttpServer::HttpServer(ProviderService& service) : impl_(std::make_unique<Impl>()) {
  route(impl_->server, service);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  int bound = port == 0 ? impl_->server.bind_to_any_port(host)
                        : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    throw Error(ErrorCode::kTransportError, "cannot listen on " + host + ":" + std::to_string(port));
  }
  return bound;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::start() {
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void HttpServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

struct HttpTransport::Impl {
  explicit Impl(const std::string& url) : client(url) {
    client.set_connection_timeout(5);
    client.set_read_timeout(10);
  }
  httplib::Client client;
};

HttpTransport::HttpTransport(const std::string& base_url) : impl_(std::make_unique<Impl>(base_url)) {}
HttpTransport::~HttpTransport() = default;

HttpResponse HttpTransport::request(const std::string& method, const std::string& path,
                                    const std::string& body) {
  httplib::Result result = method == "GET" ? impl_->client.Get(path)
                                           : impl_->client.Post(path, body, "application/json");
  if (!result) {
    throw Error(ErrorCode::kTransportError, "authority unreachable: " + httplib::to_string(result.error()));
  }
  return {result->status, result->body};
}

}  // namespace pirax
