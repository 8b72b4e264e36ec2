#pragma once

#include <iosfwd>
#include <string>

#include "deeplin/matcore.hpp"
#include "deeplin/trainers.hpp"

namespace deeplin {

// Plain CSV: a "d,<dim>" header, then dim rows of dim comma-separated values.
Mat read_matrix_csv(std::istream& in);
Mat read_matrix_csv_file(const std::string& path);
void write_matrix_csv(std::ostream& out, const Mat& m);

// Shortest text that round-trips the double exactly.
std::string format_double(double v);

// Columns: t, loss, loss_half, radius_R, min_sv, max_norm, U_t, then
// eig<k>_re, eig<k>_im per product eigenvalue when spectra were recorded.
void write_trace_csv(std::ostream& out, const TrainingTrace& trace);
void write_trace_csv_file(const std::string& path, const TrainingTrace& trace);

}  // namespace deeplin
