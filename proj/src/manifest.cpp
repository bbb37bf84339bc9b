#include "amlab/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "amlab/errors.hpp"

namespace amlab {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

[[noreturn]] void bad_value(const std::string& section, const std::string& key,
                            const std::string& value, const char* want) {
    throw ValidationError("manifest [" + section + "] " + key + " = \"" + value +
                          "\": expected " + want);
}

}  // namespace

Manifest Manifest::parse(const std::string& text) {
    Manifest m;
    std::istringstream in(text);
    std::string line;
    std::string section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ValidationError("manifest line " + std::to_string(lineno) +
                                      ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ValidationError("manifest line " + std::to_string(lineno) +
                                      ": empty section name");
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("manifest line " + std::to_string(lineno) +
                                  ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ValidationError("manifest line " + std::to_string(lineno) +
                                  ": empty key");
        m.entries_.push_back({section, key, value});
    }
    return m;
}

Manifest Manifest::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open manifest " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string Manifest::to_text() const {
    // Group by first-seen section so the output is canonical even when
    // the input interleaved its sections.
    std::vector<std::string> order;
    for (const auto& e : entries_)
        if (std::find(order.begin(), order.end(), e.section) == order.end())
            order.push_back(e.section);
    std::ostringstream out;
    bool first = true;
    for (const auto& sec : order) {
        if (!first) out << '\n';
        first = false;
        if (!sec.empty()) out << '[' << sec << "]\n";
        for (const auto& e : entries_)
            if (e.section == sec) out << e.key << " = " << e.value << '\n';
    }
    return out.str();
}

void Manifest::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << to_text();
    if (!out) throw IoError("write failed: " + path);
}

std::optional<std::string> Manifest::get(const std::string& section,
                                         const std::string& key) const {
    for (const auto& e : entries_)
        if (e.section == section && e.key == key) return e.value;
    return std::nullopt;
}

std::vector<std::string> Manifest::get_all(const std::string& section,
                                           const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& e : entries_)
        if (e.section == section && e.key == key) out.push_back(e.value);
    return out;
}

bool Manifest::has(const std::string& section, const std::string& key) const {
    return get(section, key).has_value();
}

std::string Manifest::get_string(const std::string& section, const std::string& key,
                                 const std::string& fallback) const {
    auto v = get(section, key);
    return v ? *v : fallback;
}

std::int64_t Manifest::get_int(const std::string& section, const std::string& key,
                               std::int64_t fallback) const {
    auto v = get(section, key);
    if (!v) return fallback;
    std::int64_t out = 0;
    auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || p != v->data() + v->size())
        bad_value(section, key, *v, "an integer");
    return out;
}

std::uint64_t Manifest::get_u64(const std::string& section, const std::string& key,
                                std::uint64_t fallback) const {
    auto v = get(section, key);
    if (!v) return fallback;
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || p != v->data() + v->size())
        bad_value(section, key, *v, "a nonnegative integer");
    return out;
}

double Manifest::get_double(const std::string& section, const std::string& key,
                            double fallback) const {
    auto v = get(section, key);
    if (!v) return fallback;
    try {
        std::size_t used = 0;
        double out = std::stod(*v, &used);
        if (used != v->size()) bad_value(section, key, *v, "a number");
        return out;
    } catch (const std::exception&) {
        bad_value(section, key, *v, "a number");
    }
}

bool Manifest::get_bool(const std::string& section, const std::string& key,
                        bool fallback) const {
    auto v = get(section, key);
    if (!v) return fallback;
    std::string lower = *v;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (lower == "true" || lower == "yes" || lower == "1" || lower == "on") return true;
    if (lower == "false" || lower == "no" || lower == "0" || lower == "off")
        return false;
    bad_value(section, key, *v, "a boolean");
}

std::vector<std::uint64_t> Manifest::get_u64_list(const std::string& section,
                                                  const std::string& key) const {
    std::vector<std::uint64_t> out;
    auto v = get(section, key);
    if (!v) return out;
    std::istringstream in(*v);
    std::string tok;
    while (in >> tok) {
        std::uint64_t n = 0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), n);
        if (ec != std::errc() || p != tok.data() + tok.size())
            bad_value(section, key, *v, "whitespace-separated nonnegative integers");
        out.push_back(n);
    }
    return out;
}

void Manifest::set(const std::string& section, const std::string& key,
                   const std::string& value) {
    bool replaced = false;
    for (auto it = entries_.begin(); it != entries_.end();) {
        if (it->section == section && it->key == key) {
            if (!replaced) {
                it->value = value;
                replaced = true;
                ++it;
            } else {
                it = entries_.erase(it);
            }
        } else {
            ++it;
        }
    }
    if (!replaced) append(section, key, value);
}

void Manifest::append(const std::string& section, const std::string& key,
                      const std::string& value) {
    // Keep sections contiguous: insert after the section's last entry.
    auto pos = entries_.end();
    for (auto it = entries_.begin(); it != entries_.end(); ++it)
        if (it->section == section) pos = it + 1;
    entries_.insert(pos, {section, key, value});
}

}  // namespace amlab
