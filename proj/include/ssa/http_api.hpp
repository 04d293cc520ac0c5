#pragma once

// HTTP binding of AgendaService. Every body is JSON and carries
// schema_version; errors map to {code, field, message}.

#include <string>

namespace httplib {
class Server;
}

namespace ssa {

class AgendaService;

struct HttpOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  /// Empty disables the bearer check.
  std::string bearer_token;
};

void install_routes(httplib::Server& server, AgendaService& service,
                    const HttpOptions& options);

}  // namespace ssa
