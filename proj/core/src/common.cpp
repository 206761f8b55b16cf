#include "coherent/common.hpp"

namespace coherent {

namespace {
std::string located(const std::string& msg, std::size_t line, std::size_t column) {
    if (line == 0) return msg;
    std::string out = "line " + std::to_string(line);
    if (column != 0) out += ", column " + std::to_string(column);
    return out + ": " + msg;
}
}  // namespace

ParseError::ParseError(const std::string& msg, std::size_t line, std::size_t column)
    : Error(located(msg, line, column)), line_(line), column_(column) {}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != m.cols()) throw DimensionError("ragged rows in matrix literal");
        for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c];
    }
    return m;
}

Matrix Matrix::select_rows(std::span<const std::size_t> idx) const {
    Matrix out(idx.size(), cols_);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        auto src = row(idx[i]);
        auto dst = out.row(i);
        for (std::size_t c = 0; c < cols_; ++c) dst[c] = src[c];
    }
    return out;
}

}  // namespace coherent
