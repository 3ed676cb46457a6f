#pragma once

// Real network transport for the query client. Kept out of client.hpp so the
// library and tests build without the socket dependency; only the CLI pulls
// this in.

#include <cmath>
#include <stdexcept>
#include <string>

#include "httplib.h"
#include "mapnav/client.hpp"

namespace mapnav {

inline Transport make_http_transport() {
  return [](const std::string& endpoint, const std::string& payload, const HttpHeaders& headers,
            double timeout_seconds) -> HttpResponse {
    auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos) {
      throw std::invalid_argument("endpoint must start with http:// or https://");
    }
    auto path_start = endpoint.find('/', scheme_end + 3);
    std::string base = path_start == std::string::npos ? endpoint : endpoint.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : endpoint.substr(path_start);

    httplib::Client cli(base);
    auto whole = static_cast<time_t>(timeout_seconds);
    auto micros = static_cast<time_t>((timeout_seconds - std::floor(timeout_seconds)) * 1e6);
    cli.set_connection_timeout(whole, micros);
    cli.set_read_timeout(whole, micros);
    cli.set_write_timeout(whole, micros);

    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);

    auto res = cli.Post(path, h, payload, "application/json");
    HttpResponse out;
    if (!res) {
      out.status = 0;
      out.timed_out = res.error() == httplib::Error::ConnectionTimeout ||
                      res.error() == httplib::Error::Read || res.error() == httplib::Error::Write;
      out.body = httplib::to_string(res.error());
      return out;
    }
    out.status = res->status;
    out.body = res->body;
    return out;
  };
}

}  // namespace mapnav
