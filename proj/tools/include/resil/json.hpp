#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace resil {

/// Formats a double with 17 significant digits; non-finite values become "null".
std::string format_double(double v);

/// Streaming JSON writer with caller-defined key order and two-space indent.
/// Output depends only on the calls made, so identical inputs give identical bytes.
class JsonWriter {
public:
    JsonWriter& begin_object();
    JsonWriter& end_object();
    JsonWriter& begin_array();
    JsonWriter& end_array();
    JsonWriter& key(std::string_view k);

    JsonWriter& value(std::string_view s);
    JsonWriter& value(const char* s) { return value(std::string_view(s)); }
    JsonWriter& value(bool b);
    JsonWriter& value(double d);
    JsonWriter& value(std::int64_t i);
    JsonWriter& value(int i) { return value(static_cast<std::int64_t>(i)); }
    JsonWriter& value(std::uint64_t i);
    JsonWriter& value(unsigned i) { return value(static_cast<std::uint64_t>(i)); }
    JsonWriter& null();

    /// Array of strings on one line.
    JsonWriter& strings(const std::vector<std::string>& items);

    const std::string& str() const noexcept { return out_; }

private:
    void before_value();
    void newline();
    void raw(std::string_view s) { out_.append(s); }

    struct Frame {
        bool array;
        bool empty = true;
    };
    std::string out_;
    std::vector<Frame> stack_;
    bool after_key_ = false;
};

std::string escape(std::string_view s);

}  // namespace resil
