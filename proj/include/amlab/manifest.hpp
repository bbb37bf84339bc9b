#pragma once

// Run manifests: line-oriented "key = value" entries grouped under
// [section] headers.  '#' starts a comment.  Repeated keys are
// allowed and keep their order (used for grid points).  Serialization
// is canonical, so a manifest written twice is byte-identical.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace amlab {

class Manifest {
public:
    struct Entry {
        std::string section;
        std::string key;
        std::string value;
    };

    static Manifest parse(const std::string& text);
    static Manifest load(const std::string& path);
    void save(const std::string& path) const;
    std::string to_text() const;

    // First value for section/key, or nullopt.
    std::optional<std::string> get(const std::string& section,
                                   const std::string& key) const;
    std::vector<std::string> get_all(const std::string& section,
                                     const std::string& key) const;
    bool has(const std::string& section, const std::string& key) const;

    // Typed lookups with defaults; malformed values raise ValidationError
    // naming the section and key.
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    std::int64_t get_int(const std::string& section, const std::string& key,
                         std::int64_t fallback) const;
    std::uint64_t get_u64(const std::string& section, const std::string& key,
                          std::uint64_t fallback) const;
    double get_double(const std::string& section, const std::string& key,
                      double fallback) const;
    bool get_bool(const std::string& section, const std::string& key,
                  bool fallback) const;
    // Whitespace-separated list of sizes/numbers.
    std::vector<std::uint64_t> get_u64_list(const std::string& section,
                                            const std::string& key) const;

    // Replaces every existing section/key entry with one value (or
    // appends when absent).  Used for flag overrides and for recording
    // resolved values.
    void set(const std::string& section, const std::string& key,
             const std::string& value);
    void append(const std::string& section, const std::string& key,
                const std::string& value);

    const std::vector<Entry>& entries() const { return entries_; }

private:
    std::vector<Entry> entries_;  // document order
};

}  // namespace amlab
