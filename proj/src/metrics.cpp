#include "infosel/metrics.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <unordered_map>

#include "json.hpp"

namespace infosel {

const char* to_string(MetricKind m) {
  switch (m) {
    case MetricKind::ExactMatch: return "exact_match";
    case MetricKind::TokenF1: return "token_f1";
    case MetricKind::VqaAccuracy: return "vqa_acc";
  }
  return "unknown";
}

MetricKind metric_from_string(const std::string& s) {
  if (s == "exact_match" || s == "em") return MetricKind::ExactMatch;
  if (s == "token_f1" || s == "f1") return MetricKind::TokenF1;
  if (s == "vqa_acc" || s == "vqa_accuracy" || s == "acc") return MetricKind::VqaAccuracy;
  throw ConfigError("unknown metric: \"" + s + "\"");
}

namespace {

struct CpRange {
  uint32_t lo, hi;
};

// Unicode 13 general-category P, compressed to ranges. ASCII symbols that the
// usual evaluation scripts strip ($ + < = > ^ ` | ~) are handled separately.
constexpr CpRange kPunctRanges[] = {
    {0x00021, 0x00023}, {0x00025, 0x0002A}, {0x0002C, 0x0002F}, {0x0003A, 0x0003B},
    {0x0003F, 0x00040}, {0x0005B, 0x0005D}, {0x0005F, 0x0005F}, {0x0007B, 0x0007B},
    {0x0007D, 0x0007D}, {0x000A1, 0x000A1}, {0x000A7, 0x000A7}, {0x000AB, 0x000AB},
    {0x000B6, 0x000B7}, {0x000BB, 0x000BB}, {0x000BF, 0x000BF}, {0x0037E, 0x0037E},
    {0x00387, 0x00387}, {0x0055A, 0x0055F}, {0x00589, 0x0058A}, {0x005BE, 0x005BE},
    {0x005C0, 0x005C0}, {0x005C3, 0x005C3}, {0x005C6, 0x005C6}, {0x005F3, 0x005F4},
    {0x00609, 0x0060A}, {0x0060C, 0x0060D}, {0x0061B, 0x0061B}, {0x0061E, 0x0061F},
    {0x0066A, 0x0066D}, {0x006D4, 0x006D4}, {0x00700, 0x0070D}, {0x007F7, 0x007F9},
    {0x00830, 0x0083E}, {0x0085E, 0x0085E}, {0x00964, 0x00965}, {0x00970, 0x00970},
    {0x009FD, 0x009FD}, {0x00A76, 0x00A76}, {0x00AF0, 0x00AF0}, {0x00C77, 0x00C77},
    {0x00C84, 0x00C84}, {0x00DF4, 0x00DF4}, {0x00E4F, 0x00E4F}, {0x00E5A, 0x00E5B},
    {0x00F04, 0x00F12}, {0x00F14, 0x00F14}, {0x00F3A, 0x00F3D}, {0x00F85, 0x00F85},
    {0x00FD0, 0x00FD4}, {0x00FD9, 0x00FDA}, {0x0104A, 0x0104F}, {0x010FB, 0x010FB},
    {0x01360, 0x01368}, {0x01400, 0x01400}, {0x0166E, 0x0166E}, {0x0169B, 0x0169C},
    {0x016EB, 0x016ED}, {0x01735, 0x01736}, {0x017D4, 0x017D6}, {0x017D8, 0x017DA},
    {0x01800, 0x0180A}, {0x01944, 0x01945}, {0x01A1E, 0x01A1F}, {0x01AA0, 0x01AA6},
    {0x01AA8, 0x01AAD}, {0x01B5A, 0x01B60}, {0x01BFC, 0x01BFF}, {0x01C3B, 0x01C3F},
    {0x01C7E, 0x01C7F}, {0x01CC0, 0x01CC7}, {0x01CD3, 0x01CD3}, {0x02010, 0x02027},
    {0x02030, 0x02043}, {0x02045, 0x02051}, {0x02053, 0x0205E}, {0x0207D, 0x0207E},
    {0x0208D, 0x0208E}, {0x02308, 0x0230B}, {0x02329, 0x0232A}, {0x02768, 0x02775},
    {0x027C5, 0x027C6}, {0x027E6, 0x027EF}, {0x02983, 0x02998}, {0x029D8, 0x029DB},
    {0x029FC, 0x029FD}, {0x02CF9, 0x02CFC}, {0x02CFE, 0x02CFF}, {0x02D70, 0x02D70},
    {0x02E00, 0x02E2E}, {0x02E30, 0x02E4F}, {0x02E52, 0x02E52}, {0x03001, 0x03003},
    {0x03008, 0x03011}, {0x03014, 0x0301F}, {0x03030, 0x03030}, {0x0303D, 0x0303D},
    {0x030A0, 0x030A0}, {0x030FB, 0x030FB}, {0x0A4FE, 0x0A4FF}, {0x0A60D, 0x0A60F},
    {0x0A673, 0x0A673}, {0x0A67E, 0x0A67E}, {0x0A6F2, 0x0A6F7}, {0x0A874, 0x0A877},
    {0x0A8CE, 0x0A8CF}, {0x0A8F8, 0x0A8FA}, {0x0A8FC, 0x0A8FC}, {0x0A92E, 0x0A92F},
    {0x0A95F, 0x0A95F}, {0x0A9C1, 0x0A9CD}, {0x0A9DE, 0x0A9DF}, {0x0AA5C, 0x0AA5F},
    {0x0AADE, 0x0AADF}, {0x0AAF0, 0x0AAF1}, {0x0ABEB, 0x0ABEB}, {0x0FD3E, 0x0FD3F},
    {0x0FE10, 0x0FE19}, {0x0FE30, 0x0FE52}, {0x0FE54, 0x0FE61}, {0x0FE63, 0x0FE63},
    {0x0FE68, 0x0FE68}, {0x0FE6A, 0x0FE6B}, {0x0FF01, 0x0FF03}, {0x0FF05, 0x0FF0A},
    {0x0FF0C, 0x0FF0F}, {0x0FF1A, 0x0FF1B}, {0x0FF1F, 0x0FF20}, {0x0FF3B, 0x0FF3D},
    {0x0FF3F, 0x0FF3F}, {0x0FF5B, 0x0FF5B}, {0x0FF5D, 0x0FF5D}, {0x0FF5F, 0x0FF65},
    {0x10100, 0x10102}, {0x1039F, 0x1039F}, {0x103D0, 0x103D0}, {0x1056F, 0x1056F},
    {0x10857, 0x10857}, {0x1091F, 0x1091F}, {0x1093F, 0x1093F}, {0x10A50, 0x10A58},
    {0x10A7F, 0x10A7F}, {0x10AF0, 0x10AF6}, {0x10B39, 0x10B3F}, {0x10B99, 0x10B9C},
    {0x10EAD, 0x10EAD}, {0x10F55, 0x10F59}, {0x11047, 0x1104D}, {0x110BB, 0x110BC},
    {0x110BE, 0x110C1}, {0x11140, 0x11143}, {0x11174, 0x11175}, {0x111C5, 0x111C8},
    {0x111CD, 0x111CD}, {0x111DB, 0x111DB}, {0x111DD, 0x111DF}, {0x11238, 0x1123D},
    {0x112A9, 0x112A9}, {0x1144B, 0x1144F}, {0x1145A, 0x1145B}, {0x1145D, 0x1145D},
    {0x114C6, 0x114C6}, {0x115C1, 0x115D7}, {0x11641, 0x11643}, {0x11660, 0x1166C},
    {0x1173C, 0x1173E}, {0x1183B, 0x1183B}, {0x11944, 0x11946}, {0x119E2, 0x119E2},
    {0x11A3F, 0x11A46}, {0x11A9A, 0x11A9C}, {0x11A9E, 0x11AA2}, {0x11C41, 0x11C45},
    {0x11C70, 0x11C71}, {0x11EF7, 0x11EF8}, {0x11FFF, 0x11FFF}, {0x12470, 0x12474},
    {0x16A6E, 0x16A6F}, {0x16AF5, 0x16AF5}, {0x16B37, 0x16B3B}, {0x16B44, 0x16B44},
    {0x16E97, 0x16E9A}, {0x16FE2, 0x16FE2}, {0x1BC9F, 0x1BC9F}, {0x1DA87, 0x1DA8B},
    {0x1E95E, 0x1E95F},
};

bool is_punct_codepoint(uint32_t cp) {
  if (cp < 0x80) {
    // Full ASCII punctuation set, wider than category P.
    return std::ispunct(static_cast<int>(cp)) != 0;
  }
  size_t lo = 0, hi = std::size(kPunctRanges);
  while (lo < hi) {
    size_t mid = (lo + hi) / 2;
    if (cp < kPunctRanges[mid].lo) {
      hi = mid;
    } else if (cp > kPunctRanges[mid].hi) {
      lo = mid + 1;
    } else {
      return true;
    }
  }
  return false;
}

// Decodes the next UTF-8 code point; malformed bytes pass through as-is.
uint32_t next_codepoint(const std::string& s, size_t& i, size_t& len) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    len = 1;
    return b0;
  }
  size_t n = 0;
  uint32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    n = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    n = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    n = 4;
    cp = b0 & 0x07;
  } else {
    len = 1;
    return b0;
  }
  if (i + n > s.size()) {
    len = 1;
    return b0;
  }
  for (size_t k = 1; k < n; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) {
      len = 1;
      return b0;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  len = n;
  return cp;
}

bool is_article(const std::string& tok) {
  return tok == "a" || tok == "an" || tok == "the";
}

std::unordered_map<std::string, int> token_counts(const std::vector<std::string>& toks) {
  std::unordered_map<std::string, int> counts;
  for (const auto& t : toks) ++counts[t];
  return counts;
}

double f1_single(const std::vector<std::string>& pred_toks, const std::vector<std::string>& gold_toks) {
  if (pred_toks.empty() && gold_toks.empty()) return 1.0;
  if (pred_toks.empty() || gold_toks.empty()) return 0.0;
  auto gold_counts = token_counts(gold_toks);
  int overlap = 0;
  for (const auto& [tok, cnt] : token_counts(pred_toks)) {
    auto it = gold_counts.find(tok);
    if (it != gold_counts.end()) overlap += std::min(cnt, it->second);
  }
  if (overlap == 0) return 0.0;
  const double p = static_cast<double>(overlap) / static_cast<double>(pred_toks.size());
  const double r = static_cast<double>(overlap) / static_cast<double>(gold_toks.size());
  return 2.0 * p * r / (p + r);
}

void require_golds(const std::vector<std::string>& golds) {
  if (golds.empty()) throw DataError("metric called with empty gold list");
}

}  // namespace

std::vector<std::string> normalize(const std::string& text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  size_t i = 0;
  while (i < text.size()) {
    size_t len = 0;
    uint32_t cp = next_codepoint(text, i, len);
    if (is_punct_codepoint(cp)) {
      i += len;
      continue;
    }
    if (cp < 0x80) {
      cleaned.push_back(static_cast<char>(std::tolower(static_cast<int>(cp))));
      ++i;
    } else {
      cleaned.append(text, i, len);
      i += len;
    }
  }

  std::vector<std::string> tokens;
  size_t pos = 0;
  while (pos < cleaned.size()) {
    while (pos < cleaned.size() && std::isspace(static_cast<unsigned char>(cleaned[pos]))) ++pos;
    size_t start = pos;
    while (pos < cleaned.size() && !std::isspace(static_cast<unsigned char>(cleaned[pos]))) ++pos;
    if (pos > start) {
      std::string tok = cleaned.substr(start, pos - start);
      if (!is_article(tok)) tokens.push_back(std::move(tok));
    }
  }
  return tokens;
}

double token_f1(const std::string& pred, const std::vector<std::string>& golds) {
  require_golds(golds);
  const auto pred_toks = normalize(pred);
  double best = 0.0;
  for (const auto& gold : golds) {
    best = std::max(best, f1_single(pred_toks, normalize(gold)));
    if (best == 1.0) break;
  }
  return best;
}

double exact_match(const std::string& pred, const std::vector<std::string>& golds) {
  require_golds(golds);
  const auto pred_toks = normalize(pred);
  for (const auto& gold : golds) {
    if (pred_toks == normalize(gold)) return 1.0;
  }
  return 0.0;
}

double vqa_accuracy(const std::string& pred, const std::vector<std::string>& golds) {
  require_golds(golds);
  if (golds.size() < 3) return exact_match(pred, golds);
  const auto pred_toks = normalize(pred);
  int matches = 0;
  for (const auto& gold : golds) {
    if (pred_toks == normalize(gold)) ++matches;
  }
  return std::min(static_cast<double>(matches) / 3.0, 1.0);
}

double score(MetricKind metric, const std::string& pred, const std::vector<std::string>& golds) {
  switch (metric) {
    case MetricKind::ExactMatch: return exact_match(pred, golds);
    case MetricKind::TokenF1: return token_f1(pred, golds);
    case MetricKind::VqaAccuracy: return vqa_accuracy(pred, golds);
  }
  throw ConfigError("unhandled metric kind");
}

namespace {

EvalReport finalize_report(std::string system_name, MetricKind metric,
                           std::map<std::string, double> per_instance,
                           std::optional<std::map<std::string, double>> shares) {
  EvalReport rep;
  rep.system_name = std::move(system_name);
  rep.metric = metric;
  rep.per_instance = std::move(per_instance);
  rep.n = rep.per_instance.size();
  double sum = 0.0;
  for (const auto& [id, s] : rep.per_instance) sum += s;
  rep.mean_score = rep.n == 0 ? 0.0 : 100.0 * sum / static_cast<double>(rep.n);
  rep.selection_shares = std::move(shares);
  return rep;
}

}  // namespace

EvalReport oracle(const Dataset& dataset, MetricKind metric) {
  if (!dataset.has_candidates()) throw DataError("oracle: dataset has no candidates");
  std::map<std::string, double> per_instance;
  for (const auto& inst : dataset.instances) {
    const auto& cand = dataset.candidates_for(inst.id);
    double best = 0.0;
    for (const auto& ans : cand.answers) {
      best = std::max(best, score(metric, ans, inst.gold_answers));
      if (best == 1.0) break;
    }
    per_instance.emplace(inst.id, best);
  }
  return finalize_report("Oracle", metric, std::move(per_instance), std::nullopt);
}

EvalReport evaluate_predictions(const std::map<std::string, Choice>& choices,
                                const Dataset& dataset, MetricKind metric,
                                const std::string& system_name) {
  std::map<std::string, double> per_instance;
  std::vector<size_t> picks(dataset.roster.size(), 0);
  bool all_indexed = !dataset.roster.empty();
  for (const auto& inst : dataset.instances) {
    auto it = choices.find(inst.id);
    if (it == choices.end()) {
      throw DataError("evaluate_predictions: missing choice for instance \"" + inst.id + "\"");
    }
    per_instance.emplace(inst.id, score(metric, it->second.answer, inst.gold_answers));
    if (it->second.model_index && *it->second.model_index < picks.size()) {
      ++picks[*it->second.model_index];
    } else {
      all_indexed = false;
    }
  }

  std::optional<std::map<std::string, double>> shares;
  if (all_indexed && !dataset.instances.empty()) {
    std::map<std::string, double> s;
    for (size_t j = 0; j < dataset.roster.size(); ++j) {
      s[dataset.roster[j]] =
          static_cast<double>(picks[j]) / static_cast<double>(dataset.instances.size());
    }
    shares = std::move(s);
  }
  return finalize_report(system_name, metric, std::move(per_instance), std::move(shares));
}

void write_report_csv(const std::vector<EvalReport>& reports,
                      const std::vector<std::string>& roster, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open report file: " + path);
  out << "system,metric,n,mean_score";
  for (const auto& m : roster) out << ",share_" << m;
  out << "\n";
  char buf[64];
  for (const auto& rep : reports) {
    std::snprintf(buf, sizeof(buf), "%.4f", rep.mean_score);
    out << rep.system_name << "," << to_string(rep.metric) << "," << rep.n << "," << buf;
    for (const auto& m : roster) {
      out << ",";
      if (rep.selection_shares) {
        auto it = rep.selection_shares->find(m);
        if (it != rep.selection_shares->end()) {
          std::snprintf(buf, sizeof(buf), "%.4f", it->second);
          out << buf;
        }
      }
    }
    out << "\n";
  }
}

void write_report_jsonl(const std::vector<EvalReport>& reports, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open report sidecar: " + path);
  for (const auto& rep : reports) {
    for (const auto& [id, s] : rep.per_instance) {
      nlohmann::json row;
      row["system"] = rep.system_name;
      row["id"] = id;
      row["score"] = s;
      out << row.dump() << "\n";
    }
  }
}

}  // namespace infosel
