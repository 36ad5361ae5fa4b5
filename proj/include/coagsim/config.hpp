#pragma once

#include <map>
#include <optional>
#include <string>

namespace coagsim {

// Plain-text key-value configuration with [section] headers, '=' pairs and
// '#' comments. Unknown sections or keys are rejected by the consumers so
// typos surface as errors naming the offending key.
class KeyValueConfig {
public:
    KeyValueConfig() = default;

    static KeyValueConfig parse_file(const std::string& path);
    static KeyValueConfig parse_text(const std::string& text);

    bool has(const std::string& section, const std::string& key) const;
    std::optional<std::string> raw(const std::string& section, const std::string& key) const;

    double get_double(const std::string& section, const std::string& key, double fallback) const;
    int get_int(const std::string& section, const std::string& key, int fallback) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;

    void set(const std::string& section, const std::string& key, const std::string& value);

    const std::map<std::string, std::map<std::string, std::string>>& sections() const {
        return data_;
    }

    // throws std::invalid_argument naming the first key outside the schema
    void validate_schema(
        const std::map<std::string, std::map<std::string, bool>>& known) const;

    std::string serialize() const;

private:
    std::map<std::string, std::map<std::string, std::string>> data_;
};

}  // namespace coagsim
