#include "sdve/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace sdve::ppo {

namespace {

constexpr char kMagic[8] = {'S', 'D', 'V', 'E', 'C', 'K', '0', '1'};
constexpr uint32_t kVersion = 1;

void write_u32(std::ostream& out, uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }
void write_u64(std::ostream& out, uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); }
void write_str(std::ostream& out, const std::string& s) {
  write_u32(out, uint32_t(s.size()));
  out.write(s.data(), std::streamsize(s.size()));
}

uint32_t read_u32(std::istream& in) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  return v;
}
uint64_t read_u64(std::istream& in) {
  uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 8);
  return v;
}
std::string read_str(std::istream& in) {
  const uint32_t n = read_u32(in);
  if (n > (1u << 26)) throw std::runtime_error("checkpoint: corrupt string length");
  std::string s(n, '\0');
  in.read(s.data(), std::streamsize(n));
  return s;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, PolicyValueNet& net,
                     const std::string& mode, const std::string& config_text,
                     uint64_t config_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path.string());
  out.write(kMagic, 8);
  write_u32(out, kVersion);
  write_u64(out, config_hash);
  write_str(out, mode);
  write_str(out, config_text);
  const NetConfig& cfg = net.config();
  write_u32(out, uint32_t(cfg.obs_size));
  write_u32(out, uint32_t(cfg.encoder_size));
  write_u32(out, uint32_t(cfg.lstm_size));
  write_u32(out, uint32_t(cfg.actions));
  write_u32(out, uint32_t(cfg.clusters));
  auto params = net.named_parameters();
  write_u32(out, uint32_t(params.size()));
  for (auto& [name, tensor] : params) {
    write_str(out, name);
    write_u32(out, uint32_t(tensor->shape.size()));
    for (int d : tensor->shape) write_u32(out, uint32_t(d));
    out.write(reinterpret_cast<const char*>(tensor->data.data()),
              std::streamsize(tensor->data.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("load_checkpoint: not a checkpoint file: " + path.string());
  const uint32_t version = read_u32(in);
  if (version != kVersion)
    throw std::runtime_error("load_checkpoint: unsupported version " + std::to_string(version));

  LoadedCheckpoint ck;
  ck.config_hash = read_u64(in);
  ck.mode = read_str(in);
  ck.config_text = read_str(in);
  ck.net_config.obs_size = int(read_u32(in));
  ck.net_config.encoder_size = int(read_u32(in));
  ck.net_config.lstm_size = int(read_u32(in));
  ck.net_config.actions = int(read_u32(in));
  ck.net_config.clusters = int(read_u32(in));

  numerics::Rng dummy(0);
  ck.net = std::make_unique<PolicyValueNet>(ck.net_config, dummy);
  auto params = ck.net->named_parameters();
  const uint32_t count = read_u32(in);
  if (count != params.size()) throw std::runtime_error("load_checkpoint: parameter count mismatch");
  for (auto& [name, tensor] : params) {
    const std::string stored = read_str(in);
    if (stored != name) throw std::runtime_error("load_checkpoint: parameter order mismatch");
    const uint32_t rank = read_u32(in);
    std::vector<int> shape(rank);
    for (uint32_t i = 0; i < rank; ++i) shape[i] = int(read_u32(in));
    if (shape != tensor->shape) throw std::runtime_error("load_checkpoint: shape mismatch for " + name);
    in.read(reinterpret_cast<char*>(tensor->data.data()),
            std::streamsize(tensor->data.size() * sizeof(double)));
  }
  if (!in) throw std::runtime_error("load_checkpoint: truncated file " + path.string());
  return ck;
}

}  // namespace sdve::ppo
