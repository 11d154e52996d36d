#include "pstruct/field_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

namespace pstruct::grid {

namespace {

constexpr char kMagic[4] = {'P', 'S', 'F', '1'};

static_assert(std::endian::native == std::endian::little, "field files are little-endian");

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is, const std::filesystem::path& path) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw Error(ErrorCode::IoError, "truncated field file " + path.string());
  }
  return v;
}

DomainSpec checked_domain(std::uint8_t kind, std::uint32_t n, std::uint32_t components,
                          std::size_t expected, const std::filesystem::path& path) {
  if (kind > 1) throw Error(ErrorCode::IoError, "bad domain kind in " + path.string());
  if (components != expected) {
    std::ostringstream os;
    os << path.string() << " holds " << components << " components, expected " << expected;
    throw Error(ErrorCode::ShapeMismatch, os.str());
  }
  return build_domain(static_cast<DomainKind>(kind), static_cast<int>(n));
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

template <std::size_t N>
void write_field_binary(const std::filesystem::path& path, const NodalField<N>& f) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  os.write(kMagic, 4);
  put<std::uint8_t>(os, static_cast<std::uint8_t>(f.domain().kind()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(f.domain().n()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(N));
  std::vector<double> row(N);
  for (std::size_t node = 0; node < f.nodes(); ++node) {
    for (std::size_t c = 0; c < N; ++c) row[c] = f(c, node);
    os.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(N * sizeof(double)));
  }
  if (!os) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

template <std::size_t N>
NodalField<N> read_field_binary(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw Error(ErrorCode::IoError, path.string() + " is not a field file");
  }
  const auto kind = get<std::uint8_t>(is, path);
  const auto n = get<std::uint32_t>(is, path);
  const auto comps = get<std::uint32_t>(is, path);
  NodalField<N> f(checked_domain(kind, n, comps, N, path));
  std::vector<double> row(N);
  for (std::size_t node = 0; node < f.nodes(); ++node) {
    if (!is.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(N * sizeof(double)))) {
      throw Error(ErrorCode::IoError, "truncated field file " + path.string());
    }
    for (std::size_t c = 0; c < N; ++c) f(c, node) = row[c];
  }
  return f;
}

template <std::size_t N>
void write_field_csv(const std::filesystem::path& path, const NodalField<N>& f) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  const DomainSpec& d = f.domain();
  os << "# kind=" << to_string(d.kind()) << " n=" << d.n() << " components=" << N << '\n';
  os << "i,j,k";
  for (std::size_t c = 0; c < N; ++c) os << ",c" << c;
  os << '\n';
  for (std::size_t node = 0; node < f.nodes(); ++node) {
    const auto ijk = d.coords(node);
    os << ijk[0] << ',' << ijk[1] << ',' << ijk[2];
    for (std::size_t c = 0; c < N; ++c) os << ',' << format_double(f(c, node));
    os << '\n';
  }
  if (!os) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

template <std::size_t N>
NodalField<N> read_field_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::string line;
  std::getline(is, line);
  std::string kind_name;
  int n = 0;
  std::size_t comps = 0;
  {
    std::istringstream hs(line);
    std::string tok;
    hs >> tok;
    while (hs >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
      if (key == "kind") kind_name = val;
      else if (key == "n") n = std::stoi(val);
      else if (key == "components") comps = std::stoul(val);
    }
  }
  if (kind_name.empty() || n == 0) throw Error(ErrorCode::IoError, "bad header in " + path.string());
  const auto kind = domain_kind_from_string(kind_name);
  NodalField<N> f(checked_domain(static_cast<std::uint8_t>(kind), static_cast<std::uint32_t>(n),
                                 static_cast<std::uint32_t>(comps), N, path));
  std::getline(is, line);
  std::size_t node = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (node >= f.nodes()) throw Error(ErrorCode::IoError, "too many rows in " + path.string());
    const char* p = line.data();
    const char* end = p + line.size();
    for (int skip = 0; skip < 3; ++skip) {
      p = std::find(p, end, ',');
      if (p != end) ++p;
    }
    for (std::size_t c = 0; c < N; ++c) {
      double v = 0.0;
      auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) throw Error(ErrorCode::IoError, "bad number in " + path.string());
      f(c, node) = v;
      p = res.ptr;
      if (p != end && *p == ',') ++p;
    }
    ++node;
  }
  if (node != f.nodes()) throw Error(ErrorCode::IoError, "too few rows in " + path.string());
  return f;
}

#define PSTRUCT_FIELD_IO(N)                                                      \
  template void write_field_binary<N>(const std::filesystem::path&, const NodalField<N>&); \
  template NodalField<N> read_field_binary<N>(const std::filesystem::path&);     \
  template void write_field_csv<N>(const std::filesystem::path&, const NodalField<N>&);    \
  template NodalField<N> read_field_csv<N>(const std::filesystem::path&);

PSTRUCT_FIELD_IO(1)
PSTRUCT_FIELD_IO(3)
PSTRUCT_FIELD_IO(9)

#undef PSTRUCT_FIELD_IO

}  // namespace pstruct::grid
