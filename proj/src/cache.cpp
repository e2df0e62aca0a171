#include "fracsing/cache.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fracsing {

namespace {

constexpr char kMagic[4] = {'F', 'S', 'G', 'K'};
constexpr uint32_t kVersion = 1;

}  // namespace

std::string kernel_cache_path(const std::string& dir, int n, double s,
                              const std::string& grading) {
  std::ostringstream os;
  os << dir << "/kernel_n" << n << "_s" << s << "_" << grading << ".bin";
  return os.str();
}

std::optional<GreenOperator> try_load_kernel(const std::string& path, const Grid& grid, double s) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[4];
  uint32_t version = 0;
  uint64_t n = 0;
  double s_file = 0.0;
  uint64_t glen = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  in.read(reinterpret_cast<char*>(&s_file), sizeof(s_file));
  in.read(reinterpret_cast<char*>(&glen), sizeof(glen));
  if (!in || std::memcmp(magic, kMagic, 4) != 0 || version != kVersion) return std::nullopt;
  if (glen > 64) return std::nullopt;
  std::string grading(glen, '\0');
  in.read(grading.data(), static_cast<std::streamsize>(glen));
  if (!in || static_cast<int>(n) != grid.n || s_file != s || grading != grid.grading) {
    return std::nullopt;
  }
  Matrix core(n, n);
  Vector eta(n);
  double torsion_error = 0.0;
  in.read(reinterpret_cast<char*>(core.data()), static_cast<std::streamsize>(n * n * sizeof(double)));
  in.read(reinterpret_cast<char*>(eta.data()), static_cast<std::streamsize>(n * sizeof(double)));
  in.read(reinterpret_cast<char*>(&torsion_error), sizeof(double));
  if (!in) return std::nullopt;
  GreenOperator op(grid, s, std::move(core), std::move(eta), torsion_error);
  op.set_principal(principal_eigenpair(op));
  return op;
}

void save_kernel(const std::string& path, const GreenOperator& op) {
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cache: cannot write " + path);
  const uint64_t n = static_cast<uint64_t>(op.size());
  const double s = op.s();
  const std::string& grading = op.grid().grading;
  const uint64_t glen = grading.size();
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(&kVersion), sizeof(kVersion));
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  out.write(reinterpret_cast<const char*>(&s), sizeof(s));
  out.write(reinterpret_cast<const char*>(&glen), sizeof(glen));
  out.write(grading.data(), static_cast<std::streamsize>(glen));
  out.write(reinterpret_cast<const char*>(op.kernel_core().data()),
            static_cast<std::streamsize>(n * n * sizeof(double)));
  out.write(reinterpret_cast<const char*>(op.masses().data()),
            static_cast<std::streamsize>(n * sizeof(double)));
  const double te = op.torsion_error();
  out.write(reinterpret_cast<const char*>(&te), sizeof(te));
}

GreenOperator load_or_assemble(const Grid& grid, double s, const AssembleOptions& opts,
                               const std::string& cache_dir, bool no_cache) {
  const std::string path = kernel_cache_path(cache_dir, grid.n, s, grid.grading);
  if (!no_cache) {
    if (auto op = try_load_kernel(path, grid, s)) return std::move(*op);
  }
  GreenOperator op = assemble(grid, s, opts);
  if (!no_cache) save_kernel(path, op);
  return op;
}

}  // namespace fracsing
