#include "resil/json.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace resil {

std::string format_double(double v) {
    if (!std::isfinite(v)) return "null";
    if (v == 0.0) return "0";  // drops the sign of -0
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string escape(std::string_view s) {
    std::string out;
    out.reserve(s.size() + 2);
    out.push_back('"');
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out.push_back(c);
                }
        }
    }
    out.push_back('"');
    return out;
}

void JsonWriter::newline() {
    out_.push_back('\n');
    out_.append(2 * stack_.size(), ' ');
}

void JsonWriter::before_value() {
    if (after_key_) {
        after_key_ = false;
        return;
    }
    if (stack_.empty()) {
        if (!out_.empty()) throw std::logic_error("json: multiple top-level values");
        return;
    }
    if (!stack_.back().array) throw std::logic_error("json: value without key");
    if (!stack_.back().empty) out_.push_back(',');
    stack_.back().empty = false;
    newline();
}

JsonWriter& JsonWriter::begin_object() {
    before_value();
    raw("{");
    stack_.push_back({false});
    return *this;
}

JsonWriter& JsonWriter::end_object() {
    const bool empty = stack_.back().empty;
    stack_.pop_back();
    if (!empty) newline();
    raw("}");
    if (stack_.empty()) out_.push_back('\n');
    return *this;
}

JsonWriter& JsonWriter::begin_array() {
    before_value();
    raw("[");
    stack_.push_back({true});
    return *this;
}

JsonWriter& JsonWriter::end_array() {
    const bool empty = stack_.back().empty;
    stack_.pop_back();
    if (!empty) newline();
    raw("]");
    if (stack_.empty()) out_.push_back('\n');
    return *this;
}

JsonWriter& JsonWriter::key(std::string_view k) {
    if (stack_.empty() || stack_.back().array) throw std::logic_error("json: key outside object");
    if (!stack_.back().empty) out_.push_back(',');
    stack_.back().empty = false;
    newline();
    raw(escape(k));
    raw(": ");
    after_key_ = true;
    return *this;
}

JsonWriter& JsonWriter::value(std::string_view s) {
    before_value();
    raw(escape(s));
    return *this;
}

JsonWriter& JsonWriter::value(bool b) {
    before_value();
    raw(b ? "true" : "false");
    return *this;
}

JsonWriter& JsonWriter::value(double d) {
    before_value();
    raw(format_double(d));
    return *this;
}

JsonWriter& JsonWriter::value(std::int64_t i) {
    before_value();
    raw(std::to_string(i));
    return *this;
}

JsonWriter& JsonWriter::value(std::uint64_t i) {
    before_value();
    raw(std::to_string(i));
    return *this;
}

JsonWriter& JsonWriter::null() {
    before_value();
    raw("null");
    return *this;
}

JsonWriter& JsonWriter::strings(const std::vector<std::string>& items) {
    before_value();
    raw("[");
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) raw(", ");
        raw(escape(items[i]));
    }
    raw("]");
    return *this;
}

}  // namespace resil
