#include "enspod/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "enspod/error.hpp"
#include "enspod/format.hpp"

namespace enspod {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace {

constexpr std::size_t kMagicSize = 7;

class Writer {
 public:
  Writer(const std::filesystem::path& path, const char* magic) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw FileError("cannot write " + path.string());
    out_.write(magic, kMagicSize);
  }
  void i64(std::int64_t v) { out_.write(reinterpret_cast<const char*>(&v), sizeof v); }
  void f64(double v) { out_.write(reinterpret_cast<const char*>(&v), sizeof v); }
  void vec(const Eigen::VectorXd& v) {
    out_.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  void mat(const Eigen::MatrixXd& m) {
    out_.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
  }
  void finish() {
    out_.flush();
    if (!out_) throw FileError("write failed for " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

class Reader {
 public:
  Reader(const std::filesystem::path& path, const char* magic) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw FileError("cannot open " + path.string());
    char buffer[kMagicSize];
    in_.read(buffer, kMagicSize);
    if (!in_ || std::memcmp(buffer, magic, kMagicSize) != 0) {
      throw FileError(path.string() + " is not a " + std::string(magic, kMagicSize) + " file");
    }
  }
  std::int64_t i64() {
    std::int64_t v = 0;
    read(&v, sizeof v);
    return v;
  }
  std::int64_t count(const char* what, std::int64_t max = std::int64_t{1} << 40) {
    const std::int64_t v = i64();
    if (v < 0 || v > max) throw FileError(path_.string() + ": bad " + what);
    return v;
  }
  double f64() {
    double v = 0.0;
    read(&v, sizeof v);
    return v;
  }
  Eigen::VectorXd vec(Eigen::Index n) {
    Eigen::VectorXd v(n);
    read(v.data(), static_cast<std::size_t>(n) * sizeof(double));
    return v;
  }
  Eigen::MatrixXd mat(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    read(m.data(), static_cast<std::size_t>(rows * cols) * sizeof(double));
    return m;
  }
  void finish() {
    if (in_.peek() != std::char_traits<char>::eof()) throw FileError(path_.string() + ": trailing data");
  }

 private:
  void read(void* dst, std::size_t bytes) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(bytes));
    if (!in_) throw FileError(path_.string() + ": truncated file");
  }

  std::filesystem::path path_;
  std::ifstream in_;
};

}  // namespace

void save_snapshots(const SnapshotSet& s, const std::filesystem::path& path) {
  Writer w(path, "ENSPOD1");
  w.i64(s.n_vel());
  w.i64(s.members);
  w.i64(s.per_member);
  w.f64(s.dt);
  w.i64(s.stride);
  w.mat(s.columns);
  w.finish();
}

SnapshotSet load_snapshots(const std::filesystem::path& path) {
  Reader r(path, "ENSPOD1");
  SnapshotSet s;
  const auto n_vel = r.count("n_vel");
  s.members = static_cast<int>(r.count("member count", 1 << 20));
  s.per_member = static_cast<int>(r.count("snapshot count", 1 << 24));
  s.dt = r.f64();
  s.stride = static_cast<int>(r.count("stride", 1 << 30));
  s.columns = r.mat(n_vel, static_cast<Eigen::Index>(s.members) * s.per_member);
  r.finish();
  return s;
}

void save_basis(const PodBasis& b, const std::filesystem::path& path) {
  Writer w(path, "ENSPODB");
  w.i64(b.n_vel());
  w.i64(b.rank);
  w.i64(b.active);
  w.i64(b.eigenvalues.size());
  w.vec(b.eigenvalues);
  w.mat(b.modes);
  w.finish();
}

PodBasis load_basis(const std::filesystem::path& path) {
  Reader r(path, "ENSPODB");
  PodBasis b;
  const auto n_vel = r.count("n_vel");
  b.rank = static_cast<int>(r.count("rank", 1 << 24));
  b.active = static_cast<int>(r.count("active dimension", b.rank));
  const auto count = r.count("eigenvalue count", 1 << 24);
  if (count < b.rank) throw FileError(path.string() + ": fewer eigenvalues than modes");
  b.eigenvalues = r.vec(count);
  b.modes = r.mat(n_vel, b.rank);
  r.finish();
  return b;
}

void save_reference(const ReferenceTrajectory& ref, const std::filesystem::path& path) {
  const auto J = static_cast<std::int64_t>(ref.epsilons.size());
  if (static_cast<std::int64_t>(ref.initial.size()) != J || static_cast<std::int64_t>(ref.first.size()) != J ||
      ref.average.empty()) {
    throw InvalidArgument("inconsistent reference trajectory");
  }
  Writer w(path, "ENSPODT");
  w.i64(ref.average.front().size());
  w.i64(static_cast<std::int64_t>(ref.average.size()));
  w.i64(J);
  w.f64(ref.dt);
  for (double e : ref.epsilons) w.f64(e);
  for (const auto& u : ref.initial) w.vec(u);
  for (const auto& u : ref.first) w.vec(u);
  for (const auto& u : ref.average) w.vec(u);
  w.finish();
}

ReferenceTrajectory load_reference(const std::filesystem::path& path) {
  Reader r(path, "ENSPODT");
  ReferenceTrajectory ref;
  const auto n_vel = r.count("n_vel");
  const auto levels = r.count("level count", 1 << 24);
  const auto J = r.count("member count", 1 << 20);
  ref.dt = r.f64();
  for (std::int64_t j = 0; j < J; ++j) ref.epsilons.push_back(r.f64());
  for (std::int64_t j = 0; j < J; ++j) ref.initial.push_back(r.vec(n_vel));
  for (std::int64_t j = 0; j < J; ++j) ref.first.push_back(r.vec(n_vel));
  for (std::int64_t n = 0; n < levels; ++n) ref.average.push_back(r.vec(n_vel));
  r.finish();
  return ref;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw FileError("cannot write " + path.string());
  auto line = [&](const std::vector<std::string>& cells) {
    if (cells.size() != header.size()) throw InvalidArgument("CSV row has the wrong number of cells");
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(header);
  for (const auto& row : rows) line(row);
  if (!out) throw FileError("write failed for " + path.string());
}

void write_eigenvalues_csv(const Eigen::VectorXd& eigenvalues, int rank, const std::filesystem::path& path) {
  const double total = eigenvalues.head(rank).sum();
  std::vector<std::vector<std::string>> rows;
  double running = 0.0;
  for (int i = 0; i < rank; ++i) {
    running += eigenvalues[i];
    const double frac = i + 1 == rank ? 1.0 : running / total;
    rows.push_back({std::to_string(i + 1), format_double(eigenvalues[i]), format_double(frac)});
  }
  write_csv(path, {"i", "lambda", "cumfrac"}, rows);
}

void write_errors_csv(const std::vector<std::pair<int, double>>& errors, const std::filesystem::path& path) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& [R, e] : errors) rows.push_back({std::to_string(R), format_double(e)});
  write_csv(path, {"R", "rel_error"}, rows);
}

void write_timeseries_csv(const std::vector<TimeseriesRow>& rows, const std::filesystem::path& path) {
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    cells.push_back({std::to_string(r.step), format_double(r.time),
                     r.member < 0 ? std::string("ave") : std::to_string(r.member + 1),
                     format_double(r.energy), format_double(r.enstrophy)});
  }
  write_csv(path, {"step", "time", "member", "energy", "enstrophy"}, cells);
}

void write_stability_csv(const std::vector<StabilityRow>& rows, const std::filesystem::path& path) {
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    cells.push_back({std::to_string(r.step), std::to_string(r.member + 1), format_double(r.ind41),
                     format_double(r.ind42), r.ok41 ? "1" : "0", r.ok42 ? "1" : "0"});
  }
  write_csv(path, {"step", "member", "ind41", "ind42", "ok41", "ok42"}, cells);
}

}  // namespace enspod
