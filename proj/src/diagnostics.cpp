#include "pie/diagnostics.hpp"

#include <sstream>

namespace pie {

LineCol line_col_at(std::string_view source, uint32_t offset) {
  LineCol lc;
  uint32_t limit = std::min<uint32_t>(offset, static_cast<uint32_t>(source.size()));
  for (uint32_t i = 0; i < limit; i++) {
    if (source[i] == '\n') {
      lc.line++;
      lc.col = 1;
    } else {
      lc.col++;
    }
  }
  return lc;
}

std::string render_diagnostic(const Diagnostic& d, std::string_view source,
                              std::string_view origin) {
  LineCol lc = line_col_at(source, d.span.lo);
  std::ostringstream os;
  os << origin << ":" << lc.line << ":" << lc.col << ": "
     << (d.severity == Diagnostic::Severity::Error ? "error" : "warning") << ": " << d.message;
  return os.str();
}

std::string render_diagnostics(const std::vector<Diagnostic>& ds, std::string_view source,
                               std::string_view origin) {
  std::string out;
  for (const Diagnostic& d : ds) {
    out += render_diagnostic(d, source, origin);
    out += '\n';
  }
  return out;
}

}  // namespace pie
