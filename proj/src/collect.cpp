#include "infosel/collect.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <openssl/evp.h>

#include "httplib.h"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace infosel {

namespace {

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

}  // namespace

std::string render_prompt(const PromptTemplate& tmpl, const Instance& instance) {
  if (tmpl.wants_context() && !instance.context) {
    throw DataError("render_prompt: template \"" + tmpl.template_id +
                    "\" needs {context} but instance \"" + instance.id + "\" has none");
  }
  std::string out = tmpl.body;
  if (instance.context) replace_all(out, "{context}", *instance.context);
  replace_all(out, "{question}", instance.question);
  return out;
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw NumericError("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

std::vector<ModelEndpoint> load_endpoints(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open endpoint config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("malformed endpoint config " + path + ": " + e.what());
  }
  std::vector<ModelEndpoint> endpoints;
  std::unordered_set<std::string> names;
  for (const auto& e : j.at("endpoints")) {
    ModelEndpoint ep;
    ep.name = e.at("name").get<std::string>();
    ep.url = e.at("url").get<std::string>();
    ep.auth_env_var = e.value("auth_env_var", "");
    ep.request_template = e.value("request_template", R"({"prompt": "{prompt}"})");
    ep.answer_path = e.value("answer_path", "/answer");
    ep.timeout_sec = e.value("timeout_sec", 30.0);
    ep.max_retries = e.value("max_retries", static_cast<size_t>(2));
    if (ep.timeout_sec <= 0.0) throw ConfigError("endpoint \"" + ep.name + "\": timeout must be positive");
    if (!names.insert(ep.name).second) {
      throw ConfigError("duplicate endpoint name \"" + ep.name + "\"");
    }
    endpoints.push_back(std::move(ep));
  }
  if (endpoints.empty()) throw ConfigError("endpoint config lists no endpoints");
  return endpoints;
}

namespace {

struct ParsedUrl {
  std::string scheme_host_port;  // e.g. http://localhost:8080
  std::string path;              // e.g. /v1/answer
};

ParsedUrl parse_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint url lacks scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  ParsedUrl out;
  if (path_start == std::string::npos) {
    out.scheme_host_port = url;
    out.path = "/";
  } else {
    out.scheme_host_port = url.substr(0, path_start);
    out.path = url.substr(path_start);
  }
  return out;
}

std::string cache_file(const std::string& cache_dir, const std::string& endpoint,
                       const std::string& prompt) {
  return (fs::path(cache_dir) / endpoint / (sha256_hex(prompt) + ".json")).string();
}

bool cache_lookup(const std::string& path, std::string* answer) {
  std::ifstream in(path);
  if (!in) return false;
  json j;
  try {
    in >> j;
  } catch (const json::exception&) {
    return false;  // partial/garbled entry; refetch
  }
  if (!j.contains("answer")) return false;
  *answer = j.at("answer").get<std::string>();
  return true;
}

void cache_store(const std::string& path, const std::string& endpoint, const std::string& prompt,
                 const std::string& answer) {
  const fs::path target(path);
  std::error_code ec;
  fs::create_directories(target.parent_path(), ec);
  if (ec) throw DataError("cannot create cache directory: " + target.parent_path().string());

  json j;
  j["endpoint"] = endpoint;
  j["prompt_sha256"] = sha256_hex(prompt);
  j["answer"] = answer;
  j["fetched_at"] =
      std::chrono::duration_cast<std::chrono::seconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count();

  std::ostringstream tmp_name;
  tmp_name << path << ".tmp." << std::this_thread::get_id();
  const std::string tmp = tmp_name.str();
  {
    std::ofstream out(tmp);
    if (!out) throw DataError("cache directory unwritable: " + target.parent_path().string());
    out << j.dump() << "\n";
  }
  fs::rename(tmp, target, ec);
  if (ec) throw DataError("cannot move cache entry into place: " + path);
}

// One POST with retries; empty optional on failure.
std::optional<std::string> fetch_answer(const ModelEndpoint& ep, const std::string& prompt,
                                        std::string* warning) {
  const ParsedUrl url = parse_url(ep.url);
  const std::string escaped = [&] {
    std::string dumped = json(prompt).dump();
    return dumped.substr(1, dumped.size() - 2);
  }();
  std::string body = ep.request_template;
  replace_all(body, "{prompt}", escaped);

  httplib::Client client(url.scheme_host_port);
  client.set_connection_timeout(std::chrono::milliseconds(
      static_cast<int64_t>(ep.timeout_sec * 1000)));
  client.set_read_timeout(std::chrono::milliseconds(static_cast<int64_t>(ep.timeout_sec * 1000)));
  if (!ep.auth_env_var.empty()) {
    if (const char* token = std::getenv(ep.auth_env_var.c_str())) {
      client.set_default_headers({{"Authorization", std::string("Bearer ") + token}});
    }
  }

  std::string last_error;
  for (size_t attempt = 0; attempt <= ep.max_retries; ++attempt) {
    auto res = client.Post(url.path, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      last_error = "http status " + std::to_string(res->status);
      continue;
    }
    json doc;
    try {
      doc = json::parse(res->body);
    } catch (const json::exception& e) {
      last_error = std::string("unparseable response: ") + e.what();
      continue;
    }
    std::string pointer = ep.answer_path;
    if (!pointer.empty() && pointer.front() != '/') pointer.insert(pointer.begin(), '/');
    try {
      const json& node = doc.at(json::json_pointer(pointer));
      return node.is_string() ? node.get<std::string>() : node.dump();
    } catch (const json::exception&) {
      // Document arrived but the answer path misses: soft failure, no retry.
      *warning = "answer_path \"" + ep.answer_path + "\" not found in response";
      return std::nullopt;
    }
  }
  *warning = last_error;
  return std::nullopt;
}

}  // namespace

std::unordered_map<std::string, CandidateSet> collect_answers(const std::vector<ModelEndpoint>& endpoints,
                                                    const std::vector<Instance>& instances,
                                                    const PromptTemplate& tmpl,
                                                    const std::string& cache_dir,
                                                    size_t concurrency, CollectStats* stats) {
  if (endpoints.empty()) throw ConfigError("collect_answers: no endpoints");
  if (concurrency == 0) concurrency = 1;

  // Probe writability up front so a bad cache dir fails hard, not per pair.
  {
    std::error_code ec;
    fs::create_directories(cache_dir, ec);
    if (ec) throw DataError("cache directory unwritable: " + cache_dir);
  }

  struct Task {
    size_t endpoint_idx;
    size_t instance_idx;
    std::string prompt;
  };
  std::vector<Task> tasks;
  tasks.reserve(endpoints.size() * instances.size());
  for (size_t i = 0; i < instances.size(); ++i) {
    const std::string prompt = render_prompt(tmpl, instances[i]);
    for (size_t e = 0; e < endpoints.size(); ++e) tasks.push_back({e, i, prompt});
  }

  std::vector<std::vector<std::string>> answers(endpoints.size(),
                                                std::vector<std::string>(instances.size()));
  std::atomic<size_t> next{0};
  std::atomic<size_t> hits{0}, calls{0}, failures{0};
  std::mutex log_mutex;
  std::vector<std::string> errors;

  auto worker = [&]() {
    for (;;) {
      const size_t t = next.fetch_add(1);
      if (t >= tasks.size()) return;
      const Task& task = tasks[t];
      const ModelEndpoint& ep = endpoints[task.endpoint_idx];
      const std::string entry = cache_file(cache_dir, ep.name, task.prompt);
      try {
        std::string answer;
        if (cache_lookup(entry, &answer)) {
          ++hits;
        } else {
          ++calls;
          std::string warning;
          auto fetched = fetch_answer(ep, task.prompt, &warning);
          if (!fetched) {
            ++failures;
            std::lock_guard<std::mutex> lock(log_mutex);
            std::cerr << "[collect] warning: " << ep.name << " / "
                      << instances[task.instance_idx].id << ": " << warning
                      << " (recording empty answer)\n";
          }
          answer = fetched.value_or("");
          cache_store(entry, ep.name, task.prompt, answer);
        }
        answers[task.endpoint_idx][task.instance_idx] = std::move(answer);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(log_mutex);
        errors.emplace_back(e.what());
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  const size_t n_threads = std::min(concurrency, std::max<size_t>(tasks.size(), 1));
  pool.reserve(n_threads);
  for (size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (!errors.empty()) throw DataError("collect_answers: " + errors.front());

  if (stats) {
    stats->cache_hits = hits;
    stats->network_calls = calls;
    stats->failures = failures;
  }

  std::unordered_map<std::string, CandidateSet> out;
  for (size_t i = 0; i < instances.size(); ++i) {
    CandidateSet cs;
    cs.instance_id = instances[i].id;
    cs.answers.reserve(endpoints.size());
    for (size_t e = 0; e < endpoints.size(); ++e) cs.answers.push_back(answers[e][i]);
    out.emplace(cs.instance_id, std::move(cs));
  }
  return out;
}

namespace {

// RFC4180-ish: quoted fields may contain commas, quotes ("") and newlines.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          i += 2;
        } else {
          quoted = false;
          ++i;
        }
      } else {
        field.push_back(c);
        ++i;
      }
    } else if (c == '"') {
      quoted = true;
      ++i;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      ++i;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      ++i;
      row.push_back(std::move(field));
      field.clear();
      if (row.size() > 1 || !row.front().empty()) rows.push_back(std::move(row));
      row.clear();
    } else {
      field.push_back(c);
      ++i;
    }
  }
  if (!field.empty() || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

Dataset import_answers(const std::string& path, const Dataset& dataset) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open import file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  std::vector<std::string> file_roster;
  std::map<std::string, std::vector<std::string>> file_answers;

  const size_t first_printable = text.find_first_not_of(" \t\r\n");
  if (first_printable == std::string::npos) throw DataError("import file is empty: " + path);

  if (text[first_printable] == '{') {
    // JSONL: {"id": ..., "models": [...], "answers": [...]}
    std::istringstream lines(text);
    std::string line;
    size_t line_no = 0;
    while (std::getline(lines, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      json rec;
      try {
        rec = json::parse(line);
      } catch (const json::exception& e) {
        throw DataError("import file line " + std::to_string(line_no) + ": " + e.what());
      }
      const auto id = rec.at("id").get<std::string>();
      auto models = rec.at("models").get<std::vector<std::string>>();
      auto answers = rec.at("answers").get<std::vector<std::string>>();
      if (models.size() != answers.size()) {
        throw DataError("import file line " + std::to_string(line_no) +
                        ": models/answers length mismatch");
      }
      if (file_roster.empty()) {
        file_roster = models;
      } else if (models != file_roster) {
        throw DataError("import file line " + std::to_string(line_no) +
                        ": model order differs from header record");
      }
      if (!file_answers.emplace(id, std::move(answers)).second) {
        throw DataError("import file line " + std::to_string(line_no) + ": duplicate id \"" + id +
                        "\"");
      }
    }
  } else {
    const auto rows = parse_csv(text);
    if (rows.empty()) throw DataError("import file is empty: " + path);
    const auto& header = rows.front();
    if (header.size() < 2 || header.front() != "id") {
      throw DataError("import file header must be id,model1,model2,...");
    }
    file_roster.assign(header.begin() + 1, header.end());
    for (size_t r = 1; r < rows.size(); ++r) {
      const auto& row = rows[r];
      if (row.size() != header.size()) {
        throw DataError("import file row " + std::to_string(r + 1) + ": expected " +
                        std::to_string(header.size()) + " fields, got " +
                        std::to_string(row.size()));
      }
      std::vector<std::string> answers(row.begin() + 1, row.end());
      if (!file_answers.emplace(row.front(), std::move(answers)).second) {
        throw DataError("import file row " + std::to_string(r + 1) + ": duplicate id \"" +
                        row.front() + "\"");
      }
    }
  }

  if (!dataset.roster.empty()) {
    for (const auto& model : dataset.roster) {
      if (std::find(file_roster.begin(), file_roster.end(), model) == file_roster.end()) {
        throw DataError("import file roster is incomplete: missing model \"" + model + "\"");
      }
    }
  }

  std::unordered_set<std::string> known_ids;
  for (const auto& inst : dataset.instances) known_ids.insert(inst.id);
  for (const auto& [id, answers] : file_answers) {
    if (!known_ids.count(id)) {
      throw DataError("import file names unknown instance id \"" + id + "\"");
    }
  }

  Dataset out;
  out.instances = dataset.instances;
  out.roster = file_roster;
  for (const auto& inst : out.instances) {
    auto it = file_answers.find(inst.id);
    if (it == file_answers.end()) {
      throw DataError("import file lacks answers for instance \"" + inst.id + "\"");
    }
    out.candidates.emplace(inst.id, CandidateSet{inst.id, it->second});
  }
  out.validate();
  return out;
}

}  // namespace infosel
