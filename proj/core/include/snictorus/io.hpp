#pragma once

#include <initializer_list>
#include <iosfwd>
#include <string>
#include <string_view>

namespace snic {

/// Decimal text with 17 significant digits, enough to round-trip a double.
std::string fmt17(double v);

/// Minimal CSV emitter: numbers in fmt17, strings written verbatim.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    void header(std::initializer_list<std::string_view> names);
    CsvWriter& cell(double v);
    CsvWriter& cell(long long v);
    CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
    CsvWriter& cell(std::string_view v);
    void end_row();

private:
    void sep();
    std::ostream& out_;
    bool row_started_ = false;
};

}  // namespace snic
