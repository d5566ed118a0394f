#include <cstdlib>
#include <httplib.h>
#include <json.hpp>
#include <thread>

#include "clustab/csv.hpp"
#include "clustab/error.hpp"
#include "clustab/naming.hpp"

namespace clustab::naming {
namespace {

const nlohmann::json* walk(const nlohmann::json& root, const std::string& path) {
  const nlohmann::json* node = &root;
  std::size_t start = 0;
  while (start <= path.size()) {
    const auto dot = path.find('.', start);
    const std::string part = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (node->is_array()) {
      const auto idx = csv::parse_int(part);
      if (!idx || *idx < 0 || static_cast<std::size_t>(*idx) >= node->size()) return nullptr;
      node = &(*node)[static_cast<std::size_t>(*idx)];
    } else if (node->is_object() && node->contains(part)) {
      node = &(*node)[part];
    } else {
      return nullptr;
    }
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return node;
}

}  // namespace

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  const auto scheme = config_.url.find("://");
  if (scheme == std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "backend URL '" + config_.url + "' lacks a scheme");
  }
  const auto slash = config_.url.find('/', scheme + 3);
  origin_ = config_.url.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : config_.url.substr(slash);
}

std::string HttpBackend::complete(const std::string& prompt) {
  nlohmann::json body;
  body["prompt"] = prompt;
  if (!config_.model.empty()) body["model"] = config_.model;
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (!config_.token_env.empty()) {
    if (const char* token = std::getenv(config_.token_env.c_str()); token && *token) {
      headers.emplace("Authorization", std::string("Bearer ") + token);
    }
  }

  std::string last_problem = "no attempt made";
  for (std::size_t attempt = 0; attempt <= config_.retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(config_.backoff * (1LL << (attempt - 1)));
    httplib::Client client(origin_);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);
    const auto res = client.Post(path_, headers, payload, "application/json");
    if (!res) {
      last_problem = httplib::to_string(res.error());
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      last_problem = "HTTP status " + std::to_string(res->status);
      continue;
    }
    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorCode::MalformedResponse, "backend reply is not JSON");
    }
    const auto* field = walk(reply, config_.response_field);
    if (!field || !field->is_string()) {
      throw Error(ErrorCode::MalformedResponse, "backend reply lacks string field '" + config_.response_field + "'");
    }
    return field->get<std::string>();
  }
  throw Error(ErrorCode::BackendUnavailable, "naming backend " + config_.url + " unavailable after " +
                                                 std::to_string(config_.retries + 1) + " attempts: " + last_problem);
}

}  // namespace clustab::naming
