#pragma once

#include <cstdint>
#include <unordered_map>
#include <string>
#include <vector>

#include "infosel/core.hpp"

namespace infosel {

struct PromptTemplate {
  std::string template_id;
  std::string body;  // placeholders {context} and {question}

  bool wants_context() const { return body.find("{context}") != std::string::npos; }
};

// Exact placeholder substitution, no other mutation.
std::string render_prompt(const PromptTemplate& tmpl, const Instance& instance);

struct ModelEndpoint {
  std::string name;
  std::string url;
  std::string auth_env_var;      // names the env var holding the bearer token
  std::string request_template;  // JSON body with a {prompt} placeholder
  std::string answer_path;       // JSON pointer into the response document
  double timeout_sec = 30.0;
  size_t max_retries = 2;
};

// Endpoint config file: {"endpoints": [ModelEndpoint...]}.
std::vector<ModelEndpoint> load_endpoints(const std::string& path);

struct CollectStats {
  size_t cache_hits = 0;
  size_t network_calls = 0;
  size_t failures = 0;  // pairs resolved to an empty answer
};

// Resolves every (instance, endpoint) pair from the cache or the network.
// Failed pairs become empty-string answers with a warning on stderr; results
// are written through the cache before returning. Cache layout:
// <cache_dir>/<endpoint>/<sha256(prompt)>.json
std::unordered_map<std::string, CandidateSet> collect_answers(const std::vector<ModelEndpoint>& endpoints,
                                                    const std::vector<Instance>& instances,
                                                    const PromptTemplate& tmpl,
                                                    const std::string& cache_dir,
                                                    size_t concurrency = 4,
                                                    CollectStats* stats = nullptr);

// Attaches pre-recorded answers (CSV or JSONL keyed by instance id) to a
// dataset; the roster order comes from the file header.
Dataset import_answers(const std::string& path, const Dataset& dataset);

std::string sha256_hex(const std::string& data);

}  // namespace infosel
