#include "retsyn/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "retsyn/errors.hpp"
#include "retsyn/sha256.hpp"

namespace retsyn {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void atomic_write_file(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw IoError("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

void for_each_line(const fs::path& path,
                   const std::function<void(std::size_t, std::string_view)>& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        bool blank = line.find_first_not_of(" \t") == std::string::npos;
        if (blank) continue;
        fn(line_no, line);
    }
}

std::vector<nlohmann::json> read_jsonl(const fs::path& path) {
    std::vector<nlohmann::json> rows;
    for_each_line(path, [&](std::size_t line_no, std::string_view line) {
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw ParseError(line_no, "malformed JSON");
        if (!j.is_object()) throw ParseError(line_no, "expected a JSON object");
        rows.push_back(std::move(j));
    });
    return rows;
}

void write_jsonl(const fs::path& path, const std::vector<nlohmann::json>& rows) {
    std::string buf;
    for (const auto& row : rows) {
        buf += row.dump();
        buf += '\n';
    }
    atomic_write_file(path, buf);
}

std::string tsv_join(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += '\t';
        out += cells[i];
    }
    return out;
}

void write_tsv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::string buf = tsv_join(header);
    buf += '\n';
    for (const auto& row : rows) {
        buf += tsv_join(row);
        buf += '\n';
    }
    atomic_write_file(path, buf);
}

std::string fmt_fixed(double value, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, value);
    return buf;
}

std::string tree_digest(const fs::path& root) {
    std::vector<fs::path> files;
    if (fs::exists(root)) {
        for (const auto& entry : fs::recursive_directory_iterator(root)) {
            if (entry.is_regular_file()) files.push_back(entry.path());
        }
    }
    std::vector<std::pair<std::string, fs::path>> rel;
    rel.reserve(files.size());
    for (const auto& f : files) rel.emplace_back(fs::relative(f, root).generic_string(), f);
    std::sort(rel.begin(), rel.end());
    Sha256 h;
    for (const auto& [name, file] : rel) {
        h.update(name);
        h.update("\0", 1);
        h.update(sha256_file_hex(file));
        h.update("\n", 1);
    }
    return h.hex_digest();
}

}  // namespace retsyn
