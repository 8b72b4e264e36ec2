#include "deeplin/matrix_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "deeplin/errors.hpp"

namespace deeplin {

namespace {

[[noreturn]] void io_error(const std::string& what) { throw Error(ErrorCode::io, what); }

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) io_error("not a number: '" + s + "'");
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

Mat read_matrix_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) io_error("matrix csv: empty input");
  const auto head = split(line);
  if (head.size() != 2 || head[0] != "d") io_error("matrix csv: header must be 'd,<dim>'");
  const double dim = parse_double(head[1]);
  if (dim < 1 || dim != static_cast<int>(dim)) io_error("matrix csv: bad dimension");
  const int d = static_cast<int>(dim);
  Mat m(d, d);
  for (int i = 0; i < d; ++i) {
    if (!std::getline(in, line)) io_error("matrix csv: expected " + std::to_string(d) + " rows");
    const auto cells = split(line);
    if (static_cast<int>(cells.size()) != d) {
      io_error("matrix csv: row " + std::to_string(i + 1) + " has " +
               std::to_string(cells.size()) + " entries");
    }
    for (int j = 0; j < d; ++j) m(i, j) = parse_double(cells[j]);
  }
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) io_error("matrix csv: trailing data");
  }
  return m;
}

Mat read_matrix_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) io_error("cannot open " + path);
  return read_matrix_csv(in);
}

void write_matrix_csv(std::ostream& out, const Mat& m) {
  out << "d," << m.rows() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

void write_trace_csv(std::ostream& out, const TrainingTrace& trace) {
  const bool spectra = !trace.records.empty() && trace.records.front().eigenvalues.has_value();
  out << "t,loss,loss_half,radius_R,min_sv,max_norm,U_t";
  if (spectra) {
    for (int k = 0; k < trace.d; ++k) out << ",eig" << k << "_re,eig" << k << "_im";
  }
  out << '\n';
  for (const auto& r : trace.records) {
    out << r.t << ',' << format_double(r.loss) << ',';
    if (r.loss_half) out << format_double(*r.loss_half);
    out << ',' << format_double(r.radius) << ',' << format_double(r.min_sv) << ','
        << format_double(r.max_norm) << ',' << format_double(r.u_bound);
    if (spectra) {
      for (int k = 0; k < trace.d; ++k) {
        const auto z = r.eigenvalues ? (*r.eigenvalues)(k) : std::complex<double>(NAN, NAN);
        out << ',' << format_double(z.real()) << ',' << format_double(z.imag());
      }
    }
    out << '\n';
  }
}

void write_trace_csv_file(const std::string& path, const TrainingTrace& trace) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) io_error("cannot write " + path);
  write_trace_csv(out, trace);
  if (!out) io_error("write failed for " + path);
}

}  // namespace deeplin
