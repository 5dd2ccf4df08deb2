#include "prefopt/io.hpp"

#include <openssl/evp.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "prefopt/errors.hpp"

namespace prefopt {

namespace fs = std::filesystem;

void for_each_jsonl(const fs::path& path, const std::function<void(const Json&, std::size_t)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(DataError::Kind::parse, path.string(), 0, "cannot open file");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    Json obj;
    try {
      obj = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw DataError(DataError::Kind::parse, path.string(), lineno, std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) throw DataError(DataError::Kind::parse, path.string(), lineno, "expected a JSON object");
    fn(obj, lineno);
  }
}

void JsonlCursor::fail(const std::string& what) const {
  throw DataError(DataError::Kind::schema, file, line, what);
}

bool JsonlCursor::has(const char* key) const {
  auto it = obj.find(key);
  return it != obj.end() && !it->is_null();
}

std::string JsonlCursor::str(const char* key) const {
  auto it = obj.find(key);
  if (it == obj.end()) fail(std::string("missing field '") + key + "'");
  if (!it->is_string()) fail(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

bool JsonlCursor::boolean(const char* key) const {
  auto it = obj.find(key);
  if (it == obj.end()) fail(std::string("missing field '") + key + "'");
  if (!it->is_boolean()) fail(std::string("field '") + key + "' must be true or false");
  return it->get<bool>();
}

double JsonlCursor::number(const char* key) const {
  auto it = obj.find(key);
  if (it == obj.end()) fail(std::string("missing field '") + key + "'");
  if (!it->is_number()) fail(std::string("field '") + key + "' must be a number");
  return it->get<double>();
}

std::optional<Gas> JsonlCursor::gas(const char* key) const {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_unsigned())
    fail(std::string("field '") + key + "' must be a nonnegative integer, got " + it->dump());
  return it->get<Gas>();
}

namespace {

std::vector<Finding> parse_findings(const JsonlCursor& cur, const char* key) {
  std::vector<Finding> out;
  auto it = cur.obj.find(key);
  if (it == cur.obj.end() || it->is_null()) return out;
  if (!it->is_array()) cur.fail(std::string("field '") + key + "' must be an array");
  for (const auto& f : *it) {
    if (!f.is_object()) cur.fail("finding entries must be objects");
    JsonlCursor fc{f, cur.file, cur.line};
    auto sev_text = fc.str("severity");
    auto sev = parse_severity(sev_text);
    if (!sev) cur.fail("unknown severity '" + sev_text + "'");
    out.push_back({fc.str("detector"), *sev});
  }
  return out;
}

std::map<std::string, bool> parse_test_results(const JsonlCursor& cur) {
  std::map<std::string, bool> out;
  auto it = cur.obj.find("test_results");
  if (it == cur.obj.end() || it->is_null()) return out;
  if (!it->is_object()) cur.fail("field 'test_results' must be an object of test_id -> bool");
  for (const auto& [k, v] : it->items()) {
    if (!v.is_boolean()) cur.fail("test_results['" + k + "'] must be true or false");
    out.emplace(k, v.get<bool>());
  }
  return out;
}

}  // namespace

std::vector<Problem> read_problems(const fs::path& path) {
  std::vector<Problem> out;
  const auto file = path.string();
  for_each_jsonl(path, [&](const Json& obj, std::size_t line) {
    JsonlCursor cur{obj, file, line};
    Problem p;
    p.id = cur.str("id");
    p.prompt = cur.str("prompt");
    p.reference_gas = cur.gas("reference_gas");
    if (cur.has("category")) {
      auto text = cur.str("category");
      auto cat = parse_category(text);
      if (!cat) cur.fail("unknown category '" + text + "'");
      p.category = *cat;
    }
    out.push_back(std::move(p));
  });
  return out;
}

std::vector<Candidate> read_candidates(const fs::path& path) {
  std::vector<Candidate> out;
  const auto file = path.string();
  for_each_jsonl(path, [&](const Json& obj, std::size_t line) {
    JsonlCursor cur{obj, file, line};
    out.push_back({cur.str("id"), cur.str("problem_id"), cur.str("model_id"), cur.str("source")});
  });
  return out;
}

std::vector<EvalRecord> read_evals(const fs::path& path) {
  std::vector<EvalRecord> out;
  const auto file = path.string();
  for_each_jsonl(path, [&](const Json& obj, std::size_t line) {
    JsonlCursor cur{obj, file, line};
    EvalRecord e;
    e.candidate_id = cur.str("candidate_id");
    e.compiled = cur.boolean("compiled");
    e.passed = cur.boolean("passed");
    e.gas = cur.gas("gas");
    e.findings = parse_findings(cur, "findings");
    e.test_results = parse_test_results(cur);
    out.push_back(std::move(e));
  });
  return out;
}

OrderedJson to_json(const Problem& p) {
  OrderedJson j;
  j["id"] = p.id;
  j["prompt"] = p.prompt;
  if (p.reference_gas) j["reference_gas"] = *p.reference_gas;
  j["category"] = std::string(to_string(p.category));
  return j;
}

OrderedJson to_json(const Candidate& c) {
  OrderedJson j;
  j["id"] = c.id;
  j["problem_id"] = c.problem_id;
  j["model_id"] = c.model_id;
  j["source"] = c.source;
  return j;
}

OrderedJson to_json(const EvalRecord& e) {
  OrderedJson j;
  j["candidate_id"] = e.candidate_id;
  j["compiled"] = e.compiled;
  j["passed"] = e.passed;
  if (e.gas) j["gas"] = *e.gas;
  auto findings = OrderedJson::array();
  for (const auto& f : e.findings) {
    OrderedJson fj;
    fj["detector"] = f.detector;
    fj["severity"] = std::string(to_string(f.severity));
    findings.push_back(std::move(fj));
  }
  j["findings"] = std::move(findings);
  if (!e.test_results.empty()) {
    OrderedJson tr = OrderedJson::object();
    for (const auto& [k, v] : e.test_results) tr[k] = v;
    j["test_results"] = std::move(tr);
  }
  return j;
}

void atomic_write(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw std::runtime_error("short write to " + tmp.string());
    }
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xF];
  }
  return out;
}

std::string file_sha256(const fs::path& path) { return sha256_hex(read_file(path)); }

std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

}  // namespace prefopt
