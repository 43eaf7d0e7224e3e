#include "gdsrec/diff/checkpoint.hpp"

#include <cstdint>
#include <fstream>
#include <vector>

#include "gdsrec/errors.hpp"

namespace gdsrec::diff {

namespace {

constexpr char kMagic[8] = {'G', 'D', 'S', 'R', 'E', 'C', 'P', '1'};

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw DataError("checkpoint truncated");
  return v;
}

}  // namespace

void save_parameters(std::ostream& out, std::span<const Parameter* const> params) {
  out.write(kMagic, sizeof(kMagic));
  write_pod<std::uint64_t>(out, params.size());
  for (const Parameter* p : params) {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(p->value.rows()));
    write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(p->value.cols()));
    for (Eigen::Index r = 0; r < p->value.rows(); ++r) {
      for (Eigen::Index c = 0; c < p->value.cols(); ++c) {
        write_pod<double>(out, p->value(r, c));
      }
    }
  }
  if (!out) throw DataError("checkpoint write failed");
}

void save_parameters(const std::string& path, std::span<const Parameter* const> params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open checkpoint for writing: " + path);
  save_parameters(out, params);
}

void load_parameters(std::istream& in, std::span<Parameter* const> params) {
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(magic, magic + sizeof(magic), kMagic)) {
    throw DataError("not a parameter checkpoint (bad magic)");
  }
  const auto count = read_pod<std::uint64_t>(in);
  if (count != params.size()) {
    throw DataError("checkpoint holds " + std::to_string(count) + " parameters, expected " +
                    std::to_string(params.size()));
  }
  for (Parameter* p : params) {
    const auto name_len = read_pod<std::uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) throw DataError("checkpoint truncated");
    if (name != p->name) {
      throw DataError("checkpoint parameter `" + name + "` does not match expected `" +
                      p->name + "`");
    }
    const auto rows = static_cast<Eigen::Index>(read_pod<std::uint64_t>(in));
    const auto cols = static_cast<Eigen::Index>(read_pod<std::uint64_t>(in));
    if (rows != p->value.rows() || cols != p->value.cols()) {
      throw DataError("checkpoint shape mismatch for `" + name + "`");
    }
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        p->value(r, c) = read_pod<double>(in);
      }
    }
  }
}

void load_parameters(const std::string& path, std::span<Parameter* const> params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  load_parameters(in, params);
}

}  // namespace gdsrec::diff
