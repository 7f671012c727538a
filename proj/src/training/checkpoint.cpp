#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>

#include "irl/errors.hpp"
#include "irl/training.hpp"

namespace irl {
namespace {

static_assert(std::endian::native == std::endian::little, "payloads are written as native LE");

using nlohmann::json;

constexpr char kMagic[7] = {'I', 'R', 'L', 'S', 'R', '1', '\0'};
constexpr uint64_t kMaxHeaderBytes = 64ull << 20;

json config_to_json(const ModelConfig& cfg) {
  json branches = json::array();
  for (const BranchSpec& b : cfg.branches) {
    json taps = json::array();
    for (const TapRef& t : b.input_taps) taps.push_back({t.branch, t.stage});
    branches.push_back({{"index", b.index},
                        {"n_blocks", b.n_blocks},
                        {"n_feats", b.n_feats},
                        {"loss", to_string(b.loss)},
                        {"variant", to_string(b.variant)},
                        {"input_taps", taps}});
  }
  return {{"scale", cfg.scale},
          {"n_colors", cfg.n_colors},
          {"res_scale", cfg.res_scale},
          {"branches", branches}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig cfg;
  cfg.scale = j.at("scale").get<int>();
  cfg.n_colors = j.at("n_colors").get<int>();
  cfg.res_scale = j.at("res_scale").get<double>();
  for (const json& b : j.at("branches")) {
    BranchSpec spec;
    spec.index = b.at("index").get<int>();
    spec.n_blocks = b.at("n_blocks").get<int>();
    spec.n_feats = b.at("n_feats").get<int>();
    spec.loss = parse_loss(b.at("loss").get<std::string>());
    spec.variant = parse_variant(b.at("variant").get<std::string>());
    for (const json& t : b.at("input_taps")) spec.input_taps.push_back({t.at(0).get<int>(), t.at(1).get<int>()});
    cfg.branches.push_back(std::move(spec));
  }
  return cfg;
}

struct Entry {
  std::string name;
  std::array<int64_t, 4> shape;
  std::span<const float> values;
};

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::vector<Entry> entries;
  json branches = json::array();
  for (size_t i = 0; i < ckpt.branches.size(); ++i) {
    const Branch& b = ckpt.branches[i];
    branches.push_back({{"index", b.index()}, {"frozen", b.frozen()}});
    for (const NamedParam& p : b.parameters()) {
      const Shape& s = p.value.shape();
      entries.push_back({"branch." + std::to_string(i) + "." + p.name, {s.n, s.c, s.h, s.w}, p.value.data()});
    }
  }
  json adam = json::array();
  for (size_t k = 0; k < ckpt.state.adam.size(); ++k) {
    const AdamState& st = ckpt.state.adam[k];
    adam.push_back({{"step", st.step}});
    const int64_t n = static_cast<int64_t>(st.m.size());
    entries.push_back({"adam." + std::to_string(k) + ".m", {1, 1, 1, n}, st.m});
    entries.push_back({"adam." + std::to_string(k) + ".v", {1, 1, 1, n}, st.v});
  }
  json history = json::array();
  for (const StageRecord& r : ckpt.history) {
    history.push_back({{"stage", r.stage},
                       {"label", r.label},
                       {"iterations", r.iterations},
                       {"mean_psnr", r.mean_psnr},
                       {"mean_ssim", r.mean_ssim},
                       {"wall_clock_s", r.wall_clock_s}});
  }
  json directory = json::array();
  uint64_t offset = 0;
  for (const Entry& e : entries) {
    const uint64_t bytes = e.values.size() * sizeof(float);
    directory.push_back({{"name", e.name}, {"shape", e.shape}, {"offset", offset}, {"bytes", bytes}});
    offset += bytes;
  }
  const json header = {{"format_version", Checkpoint::kFormatVersion},
                       {"config", config_to_json(ckpt.model)},
                       {"branches", branches},
                       {"state",
                        {{"step", ckpt.state.step},
                         {"best_psnr", ckpt.state.best_psnr},
                         {"rng_state", ckpt.state.rng_state},
                         {"adam", adam}}},
                       {"history", history},
                       {"payload_bytes", offset},
                       {"tensors", directory}};
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write checkpoint '" + path.string() + "'");
  out.write(kMagic, sizeof(kMagic));
  const uint64_t len = text.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const Entry& e : entries) {
    out.write(reinterpret_cast<const char*>(e.values.data()),
              static_cast<std::streamsize>(e.values.size() * sizeof(float)));
  }
  if (!out) throw DataError("write failed for checkpoint '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path.string() + "'");
  const std::string where = " in checkpoint '" + path.string() + "'";

  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw FormatError("bad magic" + where);
  }
  uint64_t len = 0;
  if (!in.read(reinterpret_cast<char*>(&len), sizeof(len)) || len > kMaxHeaderBytes) {
    throw FormatError("corrupt header length" + where);
  }
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) {
    throw FormatError("truncated header" + where);
  }
  json header;
  try {
    header = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError("malformed header" + where + ": " + e.what());
  }

  std::vector<char> payload;
  Checkpoint ck;
  try {
    const int version = header.at("format_version").get<int>();
    if (version != Checkpoint::kFormatVersion) {
      throw FormatError("format version " + std::to_string(version) + " is not supported (expected " +
                        std::to_string(Checkpoint::kFormatVersion) + ")" + where);
    }
    const uint64_t payload_bytes = header.at("payload_bytes").get<uint64_t>();
    const uint64_t consumed = sizeof(kMagic) + sizeof(len) + len;
    const uint64_t file_bytes = std::filesystem::file_size(path);
    if (file_bytes < consumed || file_bytes - consumed < payload_bytes) {
      throw FormatError("corrupt payload: truncated tensor data" + where);
    }
    payload.resize(payload_bytes);
    in.read(payload.data(), static_cast<std::streamsize>(payload_bytes));
    if (static_cast<uint64_t>(in.gcount()) != payload_bytes) {
      throw FormatError("corrupt payload: truncated tensor data" + where);
    }
    if (in.peek() != std::char_traits<char>::eof()) {
      throw FormatError("corrupt payload: trailing bytes" + where);
    }

    std::map<std::string, std::pair<uint64_t, uint64_t>> directory;
    for (const json& t : header.at("tensors")) {
      const uint64_t offset = t.at("offset").get<uint64_t>();
      const uint64_t bytes = t.at("bytes").get<uint64_t>();
      if (offset > payload_bytes || bytes > payload_bytes - offset || bytes % sizeof(float) != 0) {
        throw FormatError("corrupt payload: tensor '" + t.at("name").get<std::string>() +
                          "' lies outside the payload" + where);
      }
      directory[t.at("name").get<std::string>()] = {offset, bytes};
    }
    auto fetch = [&](const std::string& name, std::span<float> dst) {
      auto it = directory.find(name);
      if (it == directory.end()) throw FormatError("missing tensor '" + name + "'" + where);
      if (it->second.second != dst.size() * sizeof(float)) {
        throw FormatError("size mismatch for tensor '" + name + "'" + where);
      }
      std::memcpy(dst.data(), payload.data() + it->second.first, it->second.second);
    };

    try {
      ck.model = config_from_json(header.at("config"));
      validate_config(ck.model);
    } catch (const ConfigError& e) {
      throw FormatError(std::string("invalid model config") + where + ": " + e.what());
    }
    const json& branches = header.at("branches");
    for (size_t i = 0; i < branches.size(); ++i) {
      const int index = branches[i].at("index").get<int>();
      if (index != static_cast<int>(i) || index > ck.model.residual_count()) {
        throw FormatError("branch list out of order" + where);
      }
      Branch b(ck.model, index);
      for (NamedParam& p : b.parameters()) {
        fetch("branch." + std::to_string(i) + "." + p.name, p.value.mutable_data());
      }
      if (branches[i].at("frozen").get<bool>()) b.freeze();
      ck.branches.push_back(std::move(b));
    }

    const json& state = header.at("state");
    ck.state.step = state.at("step").get<int64_t>();
    ck.state.best_psnr = state.at("best_psnr").get<double>();
    ck.state.rng_state = state.at("rng_state").get<std::string>();
    const json& adam = state.at("adam");
    for (size_t k = 0; k < adam.size(); ++k) {
      AdamState st;
      st.step = adam[k].at("step").get<int64_t>();
      const auto it = directory.find("adam." + std::to_string(k) + ".m");
      if (it == directory.end()) throw FormatError("missing optimizer moments" + where);
      st.m.resize(it->second.second / sizeof(float));
      st.v.resize(st.m.size());
      fetch("adam." + std::to_string(k) + ".m", st.m);
      fetch("adam." + std::to_string(k) + ".v", st.v);
      ck.state.adam.push_back(std::move(st));
    }
    for (const json& r : header.at("history")) {
      ck.history.push_back({r.at("stage").get<int>(), r.at("label").get<std::string>(),
                            r.at("iterations").get<int64_t>(), r.at("mean_psnr").get<double>(),
                            r.at("mean_ssim").get<double>(), r.at("wall_clock_s").get<double>()});
    }
  } catch (const json::exception& e) {
    throw FormatError("malformed header" + where + ": " + e.what());
  }
  return ck;
}

}  // namespace irl
