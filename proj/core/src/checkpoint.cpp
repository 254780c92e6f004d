#include "wugnn/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "wugnn/errors.hpp"

namespace wugnn::diff {

namespace {

// Guards against allocating absurd sizes from a corrupt header.
constexpr std::uint64_t kMaxReasonableCount = std::uint64_t{1} << 32;

template <typename UInt>
void put_le(std::ostream& out, UInt value) {
  std::array<char, sizeof(UInt)> bytes{};
  for (std::size_t i = 0; i < sizeof(UInt); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

template <typename UInt>
UInt get_le(std::istream& in, const char* what) {
  std::array<unsigned char, sizeof(UInt)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw FormatError(std::string("checkpoint truncated while reading ") + what);
  UInt value = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) value |= static_cast<UInt>(bytes[i]) << (8 * i);
  return value;
}

std::string get_bytes(std::istream& in, std::uint64_t length, const char* what) {
  if (length > kMaxReasonableCount) throw FormatError(std::string("checkpoint ") + what + " length is implausible");
  std::string s(length, '\0');
  in.read(s.data(), static_cast<std::streamsize>(length));
  if (!in) throw FormatError(std::string("checkpoint truncated while reading ") + what);
  return s;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint) {
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  put_le<std::uint32_t>(out, kCheckpointVersion);
  const std::string meta = checkpoint.metadata.dump();
  put_le<std::uint64_t>(out, meta.size());
  out.write(meta.data(), static_cast<std::streamsize>(meta.size()));
  put_le<std::uint64_t>(out, checkpoint.params.size());
  for (const auto& [name, tensor] : checkpoint.params) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(tensor.rank()));
    for (std::size_t d : tensor.shape()) put_le<std::uint64_t>(out, d);
    for (double x : tensor.data()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(x));
  }
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[sizeof(kCheckpointMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw FormatError("not a checkpoint file (bad magic)");
  }
  const auto version = get_le<std::uint32_t>(in, "version");
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint checkpoint;
  const std::string meta = get_bytes(in, get_le<std::uint64_t>(in, "metadata length"), "metadata");
  try {
    checkpoint.metadata = nlohmann::json::parse(meta);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("checkpoint metadata is not valid JSON: ") + e.what());
  }
  const auto count = get_le<std::uint64_t>(in, "parameter count");
  if (count > kMaxReasonableCount) throw FormatError("checkpoint parameter count is implausible");
  for (std::uint64_t p = 0; p < count; ++p) {
    std::string name = get_bytes(in, get_le<std::uint32_t>(in, "name length"), "parameter name");
    const auto rank = get_le<std::uint32_t>(in, "rank");
    if (rank > 8) throw FormatError("parameter '" + name + "' has implausible rank");
    Shape shape(rank);
    std::uint64_t elements = 1;
    for (auto& d : shape) {
      d = get_le<std::uint64_t>(in, "dimension");
      elements *= d;
      if (elements > kMaxReasonableCount) throw FormatError("parameter '" + name + "' is implausibly large");
    }
    std::vector<double> values(elements);
    for (double& x : values) x = std::bit_cast<double>(get_le<std::uint64_t>(in, "values"));
    checkpoint.params.add(name, Tensor(std::move(shape), std::move(values), true));
  }
  return checkpoint;
}

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open checkpoint for writing");
  write_checkpoint(out, checkpoint);
  out.flush();
  if (!out) throw IoError(path, "failed writing checkpoint");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open checkpoint");
  try {
    return read_checkpoint(in);
  } catch (const FormatError& e) {
    throw FormatError(std::string(e.what()) + " (" + path + ")");
  }
}

}  // namespace wugnn::diff
