#pragma once

#include <string>
#include <utility>
#include <vector>

namespace repulse::io {

using KvList = std::vector<std::pair<std::string, std::string>>;

// RFC 4180 quoting: wrap in quotes when the field holds a comma, quote or
// newline; embedded quotes are doubled.
std::string csv_escape(const std::string& field);
std::string csv_join(const std::vector<std::string>& fields);

std::string read_file(const std::string& path);

// Writes to a sibling temp file, then renames over the target, so readers
// never observe a half-written file.
void write_file_atomic(const std::string& path, const std::string& contents);

// Flat key=value lines; '#' starts a comment, blank lines are skipped.
// Returns pairs in file order (later duplicates win when consumed as a map).
KvList parse_config(const std::string& text);
std::string format_config(const KvList& kv);

// FNV-1a (64-bit, hex) over the canonical "key=value\n" rendering; stamped
// into output headers so results can be traced to a configuration.
std::string config_hash(const KvList& kv);

// "# key: value" comment lines for the top of CSV outputs.
std::string stamp_header(const KvList& kv);

}  // namespace repulse::io
