#pragma once

// Mounts a Service on an httplib server under /v1. Request fields come from
// the query string, form bodies, or a "key: value" text body.

#include <httplib.h>

#include "fivr/service.hpp"

namespace fivr::service {

inline Record request_fields(const httplib::Request& req) {
  Record fields;
  for (const auto& [k, v] : req.params) fields.emplace_back(k, v);
  const auto type = req.get_header_value("Content-Type");
  if (!req.body.empty() && type.find("application/x-www-form-urlencoded") == std::string::npos) {
    const auto records = parse_records(req.body);
    if (!records.empty())
      for (const auto& kv : records.front()) fields.push_back(kv);
  }
  return fields;
}

inline void mount(httplib::Server& server, Service& service) {
  auto dispatch = [&service](const httplib::Request& req, httplib::Response& res) {
    Response out;
    try {
      out = service.handle(req.method, req.matches[1].str(), request_fields(req));
    } catch (const ParseError& e) {
      out = error_response(400, e.what());
    } catch (const std::exception& e) {
      out = error_response(500, e.what());
    }
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  server.Get(R"(/v1/(.*))", dispatch);
  server.Post(R"(/v1/(.*))", dispatch);
}

}  // namespace fivr::service
