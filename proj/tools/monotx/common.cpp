#include "common.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <iostream>

#include "monotx/error.hpp"

namespace monotx::cli {

std::uint64_t default_seed() {
  const char *env = std::getenv("MONOTX_SEED");
  if (env == nullptr || *env == '\0') return 0;
  char *end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0') {
    throw ValidationError("bad-seed", "MONOTX_SEED must be a non-negative integer");
  }
  return v;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

LabelSequence parse_labels(std::string_view text) {
  LabelSequence out;
  const bool numeric = !text.empty() && std::isdigit(static_cast<unsigned char>(text[0]));
  if (numeric) {
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const std::size_t comma = std::min(text.find(',', pos), text.size());
      const std::string_view tok = text.substr(pos, comma - pos);
      if (tok.empty()) throw ValidationError("invalid-label", "empty label in list");
      int v = 0;
      for (char c : tok) {
        if (!std::isdigit(static_cast<unsigned char>(c))) {
          throw ValidationError("invalid-label",
                                "mixed letters and digits in --labels");
        }
        v = v * 10 + (c - '0');
      }
      out.push_back(v);
      pos = comma + 1;
    }
    return out;
  }
  for (char c : text) {
    if (c == ',' || c == ' ') continue;
    if (c < 'a' || c > 'z') {
      throw ValidationError("invalid-label",
                            std::string("label letters must be a-z, got '") + c + "'");
    }
    out.push_back(c - 'a' + 1);
  }
  return out;
}

std::string format_labels(const LabelSequence &labels) {
  std::string s;
  for (int l : labels) {
    if (!s.empty()) s += ',';
    s += std::to_string(l);
  }
  return s;
}

nlohmann::json Report::to_json() const {
  nlohmann::json doc = {{"command", command},
                        {"version", MONOTX_VERSION},
                        {"seed", seed},
                        {"config", config},
                        {"config_hash", fnv1a_hex(config.dump())}};
  for (const auto &[k, v] : result.items()) doc[k] = v;
  return doc;
}

void log(const std::string &line) { std::cerr << line << '\n'; }

}  // namespace monotx::cli
