#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace v2xsec::csv {

/// Numeric CSV cell: 9 significant digits, "nan" / "inf" / "-inf" for non-finite values.
inline std::string number(double value) {
    if (std::isnan(value)) {
        return "nan";
    }
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.9g", value);
    return buffer;
}

/// Quotes a text cell when it contains a separator, quote or newline.
inline std::string text(const std::string& value) {
    if (value.find_first_of(",\"\n") == std::string::npos) {
        return value;
    }
    std::string quoted = "\"";
    for (char c : value) {
        if (c == '"') {
            quoted += '"';
        }
        quoted += c;
    }
    return quoted + '"';
}

}  // namespace v2xsec::csv
