#include "ssa/http_api.hpp"

#include "httplib.h"
#include "json.hpp"

#include "ssa/agenda.hpp"
#include "ssa/error.hpp"

namespace ssa {

namespace {

using nlohmann::json;
using Handler = std::function<json(const httplib::Request&)>;

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kFormatError, "body",
                std::string("request body is not JSON: ") + e.what());
  }
}

bool authorized(const httplib::Request& req, const HttpOptions& options) {
  if (options.bearer_token.empty()) return true;
  return req.get_header_value("Authorization") == "Bearer " + options.bearer_token;
}

httplib::Server::Handler wrap(const HttpOptions& options, int ok_status,
                              Handler handler) {
  return [options, ok_status, handler = std::move(handler)](
             const httplib::Request& req, httplib::Response& res) {
    try {
      if (!authorized(req, options)) {
        throw Error(ErrorCode::kUnauthorized, "Authorization",
                    "missing or invalid bearer token");
      }
      send(res, ok_status, handler(req));
    } catch (const Error& e) {
      send(res, http_status(e.code()), error_body(e));
      if (e.code() == ErrorCode::kUnauthorized) {
        res.set_header("WWW-Authenticate", "Bearer");
      }
    } catch (const std::exception& e) {
      send(res, 500, error_body(Error(ErrorCode::kStorageFailure, "", e.what())));
    }
  };
}

}  // namespace

void install_routes(httplib::Server& server, AgendaService& service,
                    const HttpOptions& options) {
  server.Put(R"(/contacts/([^/]+))",
             wrap(options, 200, [&service](const httplib::Request& req) {
               return service.put_contact(req.matches[1], parse_body(req));
             }));
  server.Put(R"(/contacts/([^/]+)/relationship)",
             wrap(options, 200, [&service](const httplib::Request& req) {
               return service.put_relationship(req.matches[1], parse_body(req));
             }));
  server.Post("/meetings", wrap(options, 201, [&service](const httplib::Request& req) {
                return service.add_meeting(parse_body(req));
              }));
  server.Get("/conflicts", wrap(options, 200, [&service](const httplib::Request&) {
               return service.list_conflicts();
             }));
  server.Get(R"(/conflicts/([^/]+)/suggestion)",
             wrap(options, 200, [&service](const httplib::Request& req) {
               return service.suggestion(req.matches[1]);
             }));
  server.Post(R"(/conflicts/([^/]+)/feedback)",
              wrap(options, 201, [&service](const httplib::Request& req) {
                return service.record_feedback(req.matches[1], parse_body(req));
              }));
  // Health stays reachable without the token so probes need no secret.
  server.Get("/healthz", wrap(HttpOptions{}, 200, [&service](const httplib::Request&) {
               return service.health();
             }));
  server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    const ErrorCode code =
        res.status == 404 ? ErrorCode::kNotFound : ErrorCode::kInvalidValue;
    res.set_content(
        error_body(Error(code, req.path, "no route for " + req.method + " " + req.path))
            .dump(),
        "application/json");
  });
}

}  // namespace ssa
