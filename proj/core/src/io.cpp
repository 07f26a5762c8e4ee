#include "snictorus/io.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace snic {

std::string fmt17(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void CsvWriter::header(std::initializer_list<std::string_view> names) {
    for (auto n : names) cell(n);
    end_row();
}

void CsvWriter::sep() {
    if (row_started_) out_ << ',';
    row_started_ = true;
}

CsvWriter& CsvWriter::cell(double v) {
    sep();
    out_ << fmt17(v);
    return *this;
}

CsvWriter& CsvWriter::cell(long long v) {
    sep();
    out_ << v;
    return *this;
}

CsvWriter& CsvWriter::cell(std::string_view v) {
    sep();
    out_ << v;
    return *this;
}

void CsvWriter::end_row() {
    out_ << '\n';
    row_started_ = false;
}

}  // namespace snic
