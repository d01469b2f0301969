#include "retone/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace retone {

namespace {

constexpr char kMagic[4] = {'R', 'T', 'N', 'C'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

struct Reader {
  const std::uint8_t* p;
  const std::uint8_t* end;

  void need(std::size_t n) const {
    if (static_cast<std::size_t>(end - p) < n) throw DataError("checkpoint: truncated file");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    p += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    p += 8;
    return v;
  }
  std::uint8_t u8() {
    need(1);
    return *p++;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(p), n);
    p += n;
    return s;
  }
  std::vector<std::uint8_t> bytes(std::size_t n) {
    need(n);
    std::vector<std::uint8_t> b(p, p + n);
    p += n;
    return b;
  }
};

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u32(out, ckpt.version);
  out.push_back(static_cast<std::uint8_t>(ckpt.kind));
  put_u32(out, static_cast<std::uint32_t>(ckpt.config_text.size()));
  out.insert(out.end(), ckpt.config_text.begin(), ckpt.config_text.end());
  put_u64(out, ckpt.training_step);
  put_u64(out, ckpt.seed);
  put_u32(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& t : ckpt.tensors) {
    put_u32(out, static_cast<std::uint32_t>(t.name.size()));
    out.insert(out.end(), t.name.begin(), t.name.end());
    out.push_back(t.dtype);
    put_u64(out, static_cast<std::uint64_t>(t.rows));
    put_u64(out, static_cast<std::uint64_t>(t.cols));
    out.insert(out.end(), t.data.begin(), t.data.end());
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write checkpoint: " + path);
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw DataError("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open checkpoint: " + path);
  std::vector<std::uint8_t> raw((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  Reader r{raw.data(), raw.data() + raw.size()};

  r.need(4);
  if (std::memcmp(r.p, kMagic, 4) != 0) throw DataError("not a retone checkpoint: " + path);
  r.p += 4;

  Checkpoint ckpt;
  ckpt.version = r.u32();
  if (ckpt.version != 1) throw DataError("unsupported checkpoint version");
  const std::uint8_t kind = r.u8();
  if (kind > 2) throw DataError("checkpoint: unknown model kind");
  ckpt.kind = static_cast<ModelKind>(kind);
  ckpt.config_text = r.str(r.u32());
  ckpt.training_step = r.u64();
  ckpt.seed = r.u64();
  const std::uint32_t n_tensors = r.u32();
  ckpt.tensors.reserve(n_tensors);
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    CheckpointTensor t;
    t.name = r.str(r.u32());
    t.dtype = r.u8();
    if (t.dtype > 1) throw DataError("checkpoint: unknown dtype for " + t.name);
    t.rows = static_cast<std::int64_t>(r.u64());
    t.cols = static_cast<std::int64_t>(r.u64());
    if (t.rows < 0 || t.cols < 0) throw DataError("checkpoint: bad shape for " + t.name);
    const std::size_t elem = t.dtype == 0 ? 4 : 8;
    t.data = r.bytes(static_cast<std::size_t>(t.rows) * static_cast<std::size_t>(t.cols) * elem);
    if (ckpt.find(t.name)) throw DataError("checkpoint: duplicate tensor " + t.name);
    ckpt.tensors.push_back(std::move(t));
  }
  return ckpt;
}

}  // namespace retone
