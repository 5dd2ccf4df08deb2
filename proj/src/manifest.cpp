#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <ostream>

#include "prefopt/errors.hpp"
#include "prefopt/io.hpp"
#include "prefopt/pipeline.hpp"
#include "stage.hpp"

namespace prefopt::pipeline {

namespace fs = std::filesystem;

Manifest Manifest::load(const fs::path& out_dir) {
  Manifest m;
  const auto path = out_dir / kManifestName;
  if (!fs::exists(path)) return m;
  Json j;
  try {
    j = Json::parse(read_file(path));
    m.config_text_ = j.value("config", std::string{});
    for (const auto& [name, st] : j.at("stages").items()) {
      StageRecord rec;
      rec.config_digest = st.at("config_digest").get<std::string>();
      rec.inputs = st.at("inputs").get<std::map<std::string, std::string>>();
      rec.outputs = st.at("outputs").get<std::map<std::string, std::string>>();
      m.stages_.emplace(name, std::move(rec));
    }
  } catch (const Json::exception& e) {
    throw DataError(DataError::Kind::parse, path.string(), 0, std::string("corrupt manifest: ") + e.what());
  }
  return m;
}

std::string Manifest::render() const {
  Json j;
  j["tool_version"] = kToolVersion;
  j["config"] = config_text_;
  Json stages = Json::object();
  for (const auto& [name, rec] : stages_) {
    Json s;
    s["config_digest"] = rec.config_digest;
    s["inputs"] = rec.inputs;
    s["outputs"] = rec.outputs;
    stages[name] = std::move(s);
  }
  j["stages"] = std::move(stages);
  return j.dump(2) + "\n";
}

void Manifest::save(const fs::path& out_dir) const { atomic_write(out_dir / kManifestName, render()); }

const StageRecord* Manifest::stage(const std::string& name) const {
  auto it = stages_.find(name);
  return it == stages_.end() ? nullptr : &it->second;
}

std::optional<std::string> Manifest::producer_of(const std::string& artifact) const {
  for (const auto& [name, rec] : stages_) {
    if (rec.outputs.contains(artifact)) return name;
  }
  return std::nullopt;
}

void Manifest::record(const std::string& name, StageRecord rec, const std::string& config_text) {
  for (auto it = stages_.begin(); it != stages_.end();) {
    bool clash = false;
    if (it->first != name) {
      for (const auto& [out, _] : rec.outputs) clash = clash || it->second.outputs.contains(out);
    }
    it = clash ? stages_.erase(it) : std::next(it);
  }
  stages_.insert_or_assign(name, std::move(rec));
  config_text_ = config_text;
}

namespace detail {

namespace {

class DirLock {
 public:
  explicit DirLock(const fs::path& dir) {
    const auto path = dir / ".prefopt.lock";
    fd_ = ::open(path.c_str(), O_CREAT | O_RDWR, 0644);
    if (fd_ < 0) throw std::runtime_error("cannot open lock file " + path.string());
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(fd_);
      throw std::runtime_error("another prefopt stage is running in " + dir.string());
    }
  }
  ~DirLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  int fd_ = -1;
};

}  // namespace

Outcome run_stage(const Context& ctx, const StageSpec& spec, const Producer& produce) {
  fs::create_directories(ctx.out_dir);
  DirLock lock(ctx.out_dir);
  auto manifest = Manifest::load(ctx.out_dir);

  StageRecord rec;
  const auto config_text = render_config(ctx.config);
  rec.config_digest = sha256_hex(config_text);

  for (const auto& name : spec.upstream) {
    const auto path = ctx.out_dir / name;
    const auto producer = manifest.producer_of(name);
    if (!fs::exists(path)) {
      throw StaleInputError("missing artifact " + name + (producer ? " (written by stage '" + *producer + "')" : "") +
                            "; re-run the upstream stage");
    }
    if (!producer) throw StaleInputError("artifact " + name + " has no manifest entry; re-run the stage that writes it");
    const auto digest = file_sha256(path);
    if (manifest.stage(*producer)->outputs.at(name) != digest)
      throw StaleInputError("artifact " + name + " changed since stage '" + *producer + "' wrote it");
    rec.inputs.emplace(name, digest);
  }
  for (const auto& path : spec.external) {
    if (!fs::exists(path)) throw DataError(DataError::Kind::parse, path.string(), 0, "input file does not exist");
    rec.inputs.emplace(path.string(), file_sha256(path));
  }

  if (const auto* prev = manifest.stage(spec.name);
      prev && prev->inputs == rec.inputs && prev->config_digest == rec.config_digest) {
    bool intact = true;
    for (const auto& [name, digest] : prev->outputs) {
      const auto path = ctx.out_dir / name;
      intact = intact && fs::exists(path) && file_sha256(path) == digest;
    }
    if (intact) {
      if (ctx.log) *ctx.log << "[" << spec.name << "] up to date\n";
      return Outcome::up_to_date;
    }
  }

  // Produce everything before writing anything, so a failure leaves no partial output.
  const auto files = produce();
  for (const auto& name : spec.outputs) {
    auto it = files.find(name);
    if (it == files.end()) throw std::logic_error("stage '" + spec.name + "' did not produce " + name);
    atomic_write(ctx.out_dir / name, it->second);
    rec.outputs.emplace(name, sha256_hex(it->second));
    if (ctx.log) *ctx.log << "[" << spec.name << "] wrote " << name << "\n";
  }
  manifest.record(spec.name, std::move(rec), config_text);
  manifest.save(ctx.out_dir);
  return Outcome::ran;
}

}  // namespace detail
}  // namespace prefopt::pipeline
