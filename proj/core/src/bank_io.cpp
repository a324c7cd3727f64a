#include <array>
#include <atomic>
#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include "lvi/bank.hpp"
#include "lvi/errors.hpp"

static_assert(std::endian::native == std::endian::little, "bank files are little-endian");

namespace lvi {
namespace {

constexpr std::array<char, 4> kMagic{'L', 'V', 'I', 'B'};
constexpr std::size_t kHeaderBytes = 64;

std::atomic<std::size_t> g_load_count{0};

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw IoError("cannot open bank file for writing: " + path.string());
  }
  template <class T>
  void put(const T& v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void put_doubles(const std::vector<double>& v) {
    out_.write(reinterpret_cast<const char*>(v.data()),
               static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  void put_floats(const std::vector<double>& v) {
    std::vector<float> tmp(v.begin(), v.end());
    out_.write(reinterpret_cast<const char*>(tmp.data()),
               static_cast<std::streamsize>(tmp.size() * sizeof(float)));
  }
  void finish(const std::filesystem::path& path) {
    out_.flush();
    if (!out_) throw IoError("failed writing bank file: " + path.string());
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open bank file: " + path.string());
  }
  void read(void* dst, std::size_t n) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw IoError("bank file is truncated: " + path_.string());
    }
  }
  template <class T>
  T get() {
    T v;
    read(&v, sizeof(T));
    return v;
  }
  std::vector<double> get_doubles(std::size_t n) {
    std::vector<double> v(n);
    read(v.data(), n * sizeof(double));
    return v;
  }
  std::vector<double> get_floats(std::size_t n) {
    std::vector<float> tmp(n);
    read(tmp.data(), n * sizeof(float));
    return {tmp.begin(), tmp.end()};
  }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
};

BankHeader parse_header(Reader& r) {
  std::array<char, 4> magic{};
  r.read(magic.data(), magic.size());
  if (magic != kMagic) throw IoError("not a bank file (bad magic)");
  BankHeader h;
  h.version = r.get<std::uint32_t>();
  h.spec_hash = r.get<std::uint64_t>();
  h.delta_fine = r.get<double>();
  h.delta_coarse = r.get<double>();
  h.m_sub = r.get<std::uint64_t>();
  h.m_ou = r.get<std::uint64_t>();
  h.base_seed = r.get<std::uint64_t>();
  const auto precision = r.get<std::uint8_t>();
  std::array<char, 7> reserved{};
  r.read(reserved.data(), reserved.size());
  if (h.version != BankHeader::kVersion) {
    throw ConfigError("unsupported bank format version " + std::to_string(h.version));
  }
  if (precision > 1) throw IoError("bank file has an invalid precision flag");
  h.precision = static_cast<StoragePrecision>(precision);
  return h;
}

}  // namespace

void save_bank(const SimulationBank& bank, const std::filesystem::path& path) {
  Writer w(path);
  const BankHeader& h = bank.header;
  for (char c : kMagic) w.put(c);
  w.put(h.version);
  w.put(h.spec_hash);
  w.put(h.delta_fine);
  w.put(h.delta_coarse);
  w.put(h.m_sub);
  w.put(h.m_ou);
  w.put(h.base_seed);
  w.put(static_cast<std::uint8_t>(h.precision));
  for (int i = 0; i < 7; ++i) w.put(std::uint8_t{0});
  for (const auto& p : bank.sub_paths) {
    w.put(p.seed);
    w.put_doubles(p.increments);
  }
  for (const auto& rec : bank.records) {
    w.put(rec.seed);
    w.put_doubles(rec.sub.increments);
    if (h.precision == StoragePrecision::kFloat32) {
      w.put_floats(rec.checkpoints);
    } else {
      w.put_doubles(rec.checkpoints);
    }
  }
  w.finish(path);
}

BankHeader read_bank_header(const std::filesystem::path& path) {
  Reader r(path);
  return parse_header(r);
}

SimulationBank load_bank(const std::filesystem::path& path, const ProblemSpec& spec) {
  g_load_count.fetch_add(1, std::memory_order_relaxed);
  spec.validate();
  Reader r(path);
  SimulationBank bank;
  bank.spec = spec;
  bank.header = parse_header(r);
  const BankHeader& h = bank.header;
  if (h.spec_hash != spec.bank_hash()) {
    throw ConfigError("bank file " + path.string() + " was generated for a different problem spec");
  }
  if (!integer_ratio(h.delta_coarse, h.delta_fine)) {
    throw IoError("bank file has incompatible grids");
  }
  TimeGrid fine(0.0, 1.0, 1.0), coarse(0.0, 1.0, 1.0);
  try {
    fine = bank.fine_grid();
    coarse = bank.coarse_grid();
  } catch (const DomainError&) {
    throw IoError("bank file grids do not fit the horizon");
  }
  const std::size_t n_fine = fine.num_steps();
  const std::size_t n_ckpt = coarse.num_points() * spec.dim;
  const std::size_t value_bytes = h.precision == StoragePrecision::kFloat32 ? 4 : 8;
  const std::uintmax_t expected =
      kHeaderBytes + h.m_sub * (8 + 8 * n_fine) + h.m_ou * (8 + 8 * n_fine + value_bytes * n_ckpt);
  std::error_code ec;
  const auto actual = std::filesystem::file_size(path, ec);
  if (ec) throw IoError("cannot stat bank file: " + path.string());
  if (actual != expected) {
    throw IoError("bank file size " + std::to_string(actual) + " does not match header (expected " +
                  std::to_string(expected) + ")");
  }
  bank.sub_paths.reserve(h.m_sub);
  for (std::uint64_t i = 0; i < h.m_sub; ++i) {
    const auto seed = r.get<std::uint64_t>();
    bank.sub_paths.push_back(SubordinatorPath{fine, r.get_doubles(n_fine), seed});
  }
  bank.records.reserve(h.m_ou);
  for (std::uint64_t j = 0; j < h.m_ou; ++j) {
    ConvolutionRecord rec{SubordinatorPath{fine, {}, 0}, {}, 0};
    rec.seed = r.get<std::uint64_t>();
    rec.sub = SubordinatorPath{fine, r.get_doubles(n_fine), rec.seed};
    rec.checkpoints = h.precision == StoragePrecision::kFloat32 ? r.get_floats(n_ckpt)
                                                                : r.get_doubles(n_ckpt);
    bank.records.push_back(std::move(rec));
  }
  return bank;
}

std::size_t bank_load_count() { return g_load_count.load(std::memory_order_relaxed); }

}  // namespace lvi
