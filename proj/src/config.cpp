#include "coagsim/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace coagsim {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config file not found: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str());
}

KeyValueConfig KeyValueConfig::parse_text(const std::string& text) {
    KeyValueConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            cfg.data_[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value, got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
        cfg.data_[section][key] = val;
    }
    return cfg;
}

bool KeyValueConfig::has(const std::string& section, const std::string& key) const {
    const auto s = data_.find(section);
    return s != data_.end() && s->second.count(key) > 0;
}

std::optional<std::string> KeyValueConfig::raw(const std::string& section,
                                               const std::string& key) const {
    const auto s = data_.find(section);
    if (s == data_.end()) return std::nullopt;
    const auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    return k->second;
}

double KeyValueConfig::get_double(const std::string& section, const std::string& key,
                                  double fallback) const {
    const auto v = raw(section, key);
    if (!v) return fallback;
    try {
        std::size_t pos = 0;
        const double d = std::stod(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("");
        return d;
    } catch (...) {
        throw std::invalid_argument("config key [" + section + "] " + key +
                                    " is not a number: '" + *v + "'");
    }
}

int KeyValueConfig::get_int(const std::string& section, const std::string& key,
                            int fallback) const {
    const auto v = raw(section, key);
    if (!v) return fallback;
    try {
        std::size_t pos = 0;
        const int i = std::stoi(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("");
        return i;
    } catch (...) {
        throw std::invalid_argument("config key [" + section + "] " + key +
                                    " is not an integer: '" + *v + "'");
    }
}

std::string KeyValueConfig::get_string(const std::string& section, const std::string& key,
                                       const std::string& fallback) const {
    const auto v = raw(section, key);
    return v ? *v : fallback;
}

void KeyValueConfig::set(const std::string& section, const std::string& key,
                         const std::string& value) {
    data_[section][key] = value;
}

void KeyValueConfig::validate_schema(
    const std::map<std::string, std::map<std::string, bool>>& known) const {
    for (const auto& [sec, kv] : data_) {
        const auto s = known.find(sec);
        if (s == known.end())
            throw std::invalid_argument("unknown config section [" + sec + "]");
        for (const auto& [key, _] : kv) {
            if (!s->second.count(key))
                throw std::invalid_argument("unknown config key '" + key + "' in section [" +
                                            sec + "]");
        }
    }
}

std::string KeyValueConfig::serialize() const {
    std::ostringstream os;
    for (const auto& [sec, kv] : data_) {
        os << "[" << sec << "]\n";
        for (const auto& [key, val] : kv) os << key << " = " << val << "\n";
        os << "\n";
    }
    return os.str();
}

}  // namespace coagsim
