#pragma once

#include <cstdio>
#include <string>

namespace reclda {

/// Fixed-point decimal text, e.g. fixed(0.5, 6) == "0.500000".
inline std::string fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    return buf;
}

/// CSV field, quoted only when it contains a delimiter, quote or newline.
inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    return out + "\"";
}

}  // namespace reclda
