#pragma once

#include <complex>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "rmtk/complex_matrix.hpp"

namespace rmtk {

/// Parses "a+bi", "a-bi", "a", "bi", "i", "-i" (also "j" for the imaginary
/// unit). Throws ValidationError on malformed input.
cplx parse_complex(std::string_view text);

/// Round-trippable "a+bi" with 17 significant digits.
std::string format_complex(cplx z);

/// CSV complex matrix: one row per line, comma-separated "a+bi" entries.
ComplexMatrix read_matrix_csv(std::istream& in);
ComplexMatrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(std::ostream& out, const ComplexMatrix& a);
void write_matrix_csv(const std::filesystem::path& path, const ComplexMatrix& a);

}  // namespace rmtk
