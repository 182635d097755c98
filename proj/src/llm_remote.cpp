#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>
#include <regex>

#include "pattern/llm_harness.hpp"

namespace pattern::llm {

namespace {

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

}  // namespace

RemoteConfig RemoteConfig::from_env() {
  RemoteConfig cfg;
  cfg.endpoint = env_or("PBT_LLM_ENDPOINT", "");
  cfg.model = env_or("PBT_LLM_MODEL", "");
  std::string key_var = env_or("PBT_LLM_API_KEY_VAR", "OPENAI_API_KEY");
  cfg.api_key = env_or(key_var.c_str(), "");
  if (cfg.endpoint.empty()) throw std::invalid_argument("PBT_LLM_ENDPOINT is not set");
  if (cfg.model.empty()) throw std::invalid_argument("PBT_LLM_MODEL is not set");
  return cfg;
}

RemoteBackend::RemoteBackend(RemoteConfig cfg) : cfg_(std::move(cfg)) {
  static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(cfg_.endpoint, m, url)) throw std::invalid_argument("bad endpoint URL: " + cfg_.endpoint);
  scheme_host_port_ = m[1].str();
  std::string base = m[2].matched ? m[2].str() : "";
  while (!base.empty() && base.back() == '/') base.pop_back();
  path_ = base + "/chat/completions";
}

std::string RemoteBackend::complete(const std::string& prompt) {
  httplib::Client cli(scheme_host_port_);
  cli.set_connection_timeout(30);
  cli.set_read_timeout(cfg_.timeout_seconds);
  cli.set_write_timeout(60);
  httplib::Headers headers;
  if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);

  nlohmann::json body = {{"model", cfg_.model},
                         {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})}};
  if (cfg_.temperature) body["temperature"] = *cfg_.temperature;

  auto res = cli.Post(path_, headers, body.dump(), "application/json");
  if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()));
  if (res->status == 429 || res->status >= 500)
    throw TransportError("server returned HTTP " + std::to_string(res->status));
  if (res->status != 200)
    throw std::runtime_error("server returned HTTP " + std::to_string(res->status) + ": " + res->body);
  try {
    auto j = nlohmann::json::parse(res->body);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    return content.is_null() ? std::string{} : content.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed completion response: ") + e.what());
  }
}

}  // namespace pattern::llm
