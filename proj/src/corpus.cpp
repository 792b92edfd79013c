#include "strata_audit/corpus.hpp"

#include "strata_audit/errors.hpp"
#include "strata_audit/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

namespace strata_audit::corpus {

namespace {

constexpr char kNpyMagic[6] = {'\x93', 'N', 'U', 'M', 'P', 'Y'};

std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Pulls one 'key': value item out of the numpy header dict. The header is
// machine-written, so a positional scan is enough.
std::string_view header_value(std::string_view header, std::string_view key, long long base_offset) {
    const std::string quoted = "'" + std::string(key) + "'";
    const std::size_t kpos = header.find(quoted);
    if (kpos == std::string_view::npos)
        throw IngestError("array header missing key " + std::string(key), base_offset);
    std::size_t pos = header.find(':', kpos + quoted.size());
    if (pos == std::string_view::npos)
        throw IngestError("malformed array header near " + std::string(key), base_offset);
    ++pos;
    while (pos < header.size() && header[pos] == ' ') ++pos;
    std::size_t end = pos;
    if (pos < header.size() && header[pos] == '(') {
        end = header.find(')', pos);
        if (end == std::string_view::npos)
            throw IngestError("unterminated shape tuple in array header", base_offset);
        ++end;
    } else {
        while (end < header.size() && header[end] != ',' && header[end] != '}') ++end;
    }
    return text::trim(header.substr(pos, end - pos));
}

std::vector<std::size_t> parse_shape(std::string_view tuple, long long base_offset) {
    if (tuple.size() < 2 || tuple.front() != '(' || tuple.back() != ')')
        throw IngestError("malformed shape in array header", base_offset);
    tuple = tuple.substr(1, tuple.size() - 2);
    std::vector<std::size_t> dims;
    for (std::string_view part : text::split(tuple, ',')) {
        part = text::trim(part);
        if (part.empty()) continue;  // trailing comma of 1-tuples
        const auto v = text::parse_int(part);
        if (!v || *v < 0) throw IngestError("malformed shape in array header", base_offset);
        dims.push_back(static_cast<std::size_t>(*v));
    }
    return dims;
}

void check_finite(const TokenCloud& cloud, long long payload_offset, std::size_t item_size) {
    for (std::size_t e = 0; e < cloud.coords.size(); ++e) {
        if (!std::isfinite(cloud.coords[e])) {
            const std::size_t row = e / cloud.d;
            throw IngestError("non-finite value at row " + std::to_string(row) + ", column " +
                                  std::to_string(e % cloud.d),
                              payload_offset + static_cast<long long>(e * item_size));
        }
    }
}

void validate_meta_records(const std::vector<TokenMeta>& meta) {
    std::set<std::pair<std::int64_t, std::int64_t>> seen;
    for (const TokenMeta& m : meta) {
        if (m.timestep < 0) throw MetaError("negative timestep in metadata");
        if (!seen.emplace(m.episode_id, m.timestep).second)
            throw MetaError("duplicate (episode, timestep) pair: (" + std::to_string(m.episode_id) +
                            ", " + std::to_string(m.timestep) + ")");
    }
}

} // namespace

TokenCloud load_array_file(const std::string& path) {
    const std::string bytes = read_file_bytes(path);
    if (bytes.size() < 10 || std::memcmp(bytes.data(), kNpyMagic, 6) != 0)
        throw IngestError("not an NPY array file (bad magic)", 0);
    if (bytes[6] != '\x01' || bytes[7] != '\x00')
        throw IngestError("unsupported NPY version (want 1.0)", 6);
    std::uint16_t header_len = 0;
    std::memcpy(&header_len, bytes.data() + 8, 2);
    const std::size_t header_end = 10 + static_cast<std::size_t>(header_len);
    if (bytes.size() < header_end) throw IngestError("truncated array header", 8);
    const std::string_view header(bytes.data() + 10, header_len);

    const std::string_view descr = header_value(header, "descr", 10);
    std::size_t item_size = 0;
    if (descr == "'<f8'")
        item_size = 8;
    else if (descr == "'<f4'")
        item_size = 4;
    else
        throw IngestError("unsupported dtype " + std::string(descr) +
                              " (want little-endian '<f4' or '<f8')",
                          10);
    if (header_value(header, "fortran_order", 10) != "False")
        throw IngestError("Fortran-order arrays are not supported", 10);
    const std::vector<std::size_t> shape = parse_shape(header_value(header, "shape", 10), 10);
    if (shape.size() != 2)
        throw IngestError("array rank is " + std::to_string(shape.size()) + ", want 2", 10);

    TokenCloud cloud;
    cloud.n = shape[0];
    cloud.d = shape[1];
    cloud.id = path;
    if (cloud.n < 1 || cloud.d < 1)
        throw IngestError("empty array (shape " + std::to_string(cloud.n) + "x" +
                              std::to_string(cloud.d) + ")",
                          10);
    const std::size_t count = cloud.n * cloud.d;
    if (bytes.size() - header_end != count * item_size)
        throw IngestError("payload size mismatch: have " + std::to_string(bytes.size() - header_end) +
                              " bytes, want " + std::to_string(count * item_size),
                          static_cast<long long>(header_end));

    cloud.coords.resize(count);
    const char* payload = bytes.data() + header_end;
    if (item_size == 8) {
        std::memcpy(cloud.coords.data(), payload, count * 8);
    } else {
        for (std::size_t e = 0; e < count; ++e) {
            float f = 0.0f;
            std::memcpy(&f, payload + e * 4, 4);
            cloud.coords[e] = static_cast<double>(f);
        }
    }
    check_finite(cloud, static_cast<long long>(header_end), item_size);
    return cloud;
}

void write_array_file(const std::string& path, const TokenCloud& cloud) {
    std::string dict = "{'descr': '<f8', 'fortran_order': False, 'shape': (" +
                       std::to_string(cloud.n) + ", " + std::to_string(cloud.d) + "), }";
    // Pad so magic+version+len+header is a multiple of 64, header ends in \n.
    std::size_t total = 10 + dict.size() + 1;
    const std::size_t padded = (total + 63) / 64 * 64;
    dict.append(padded - total, ' ');
    dict.push_back('\n');

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IngestError("cannot open file for writing: " + path);
    out.write(kNpyMagic, 6);
    out.put('\x01');
    out.put('\x00');
    const std::uint16_t header_len = static_cast<std::uint16_t>(dict.size());
    out.write(reinterpret_cast<const char*>(&header_len), 2);
    out.write(dict.data(), static_cast<std::streamsize>(dict.size()));
    out.write(reinterpret_cast<const char*>(cloud.coords.data()),
              static_cast<std::streamsize>(cloud.coords.size() * 8));
    if (!out) throw IngestError("write failed: " + path);
}

TokenCloud load_csv(const std::string& path, bool has_header) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open file: " + path);
    TokenCloud cloud;
    cloud.id = path;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && has_header) continue;
        const std::string_view trimmed = text::trim(line);
        if (trimmed.empty()) continue;
        const auto cells = text::split(trimmed, ',');
        if (cloud.d == 0) {
            cloud.d = cells.size();
        } else if (cells.size() != cloud.d) {
            throw IngestError("ragged row at line " + std::to_string(line_no) + ": expected " +
                              std::to_string(cloud.d) + " fields, got " + std::to_string(cells.size()));
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const auto v = text::parse_double(text::trim(cells[c]));
            if (!v)
                throw IngestError("non-numeric cell at line " + std::to_string(line_no) +
                                  ", column " + std::to_string(c));
            if (!std::isfinite(*v))
                throw IngestError("non-finite value at line " + std::to_string(line_no) +
                                  ", column " + std::to_string(c));
            cloud.coords.push_back(*v);
        }
        ++cloud.n;
    }
    if (cloud.n == 0) throw IngestError("no data rows in " + path);
    return cloud;
}

void write_csv(const std::string& path, const TokenCloud& cloud, bool write_header) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IngestError("cannot open file for writing: " + path);
    if (write_header) {
        for (std::size_t c = 0; c < cloud.d; ++c) {
            if (c) out << ',';
            out << 'x' << c;
        }
        out << '\n';
    }
    for (std::size_t i = 0; i < cloud.n; ++i) {
        for (std::size_t c = 0; c < cloud.d; ++c) {
            if (c) out << ',';
            out << text::format_double(cloud.coords[i * cloud.d + c]);
        }
        out << '\n';
    }
    if (!out) throw IngestError("write failed: " + path);
}

std::vector<TokenMeta> load_meta_records(const std::string& meta_path, std::size_t expected_n) {
    std::ifstream in(meta_path);
    if (!in) throw MetaError("cannot open metadata file: " + meta_path);
    std::vector<TokenMeta> meta(expected_n);
    std::vector<bool> filled(expected_n, false);
    std::string line;
    std::size_t line_no = 0;
    std::size_t records = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw MetaError("metadata line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("token") || !j.contains("episode") || !j.contains("t"))
            throw MetaError("metadata line " + std::to_string(line_no) +
                            ": need keys token, episode, t");
        const std::int64_t token = j.at("token").get<std::int64_t>();
        ++records;
        if (token < 0 || static_cast<std::size_t>(token) >= expected_n)
            throw MetaError("metadata record count mismatch: token " + std::to_string(token) +
                            " outside 0.." + std::to_string(expected_n - 1));
        if (filled[static_cast<std::size_t>(token)])
            throw MetaError("duplicate metadata record for token " + std::to_string(token));
        TokenMeta m;
        m.episode_id = j.at("episode").get<std::int64_t>();
        m.timestep = j.at("t").get<std::int64_t>();
        if (j.contains("events")) {
            for (const auto& e : j.at("events")) m.events.push_back(e.get<std::string>());
            std::sort(m.events.begin(), m.events.end());
            m.events.erase(std::unique(m.events.begin(), m.events.end()), m.events.end());
        }
        if (j.contains("thumbnail")) m.thumbnail = j.at("thumbnail").get<std::string>();
        meta[static_cast<std::size_t>(token)] = std::move(m);
        filled[static_cast<std::size_t>(token)] = true;
    }
    if (records != expected_n)
        throw MetaError("metadata record count mismatch: " + std::to_string(records) +
                        " records for " + std::to_string(expected_n) + " tokens");
    validate_meta_records(meta);
    return meta;
}

TokenCloud attach_meta(TokenCloud cloud, const std::string& meta_path) {
    cloud.meta = load_meta_records(meta_path, cloud.n);
    return cloud;
}

void write_meta(const std::string& path, const std::vector<TokenMeta>& meta) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw MetaError("cannot open file for writing: " + path);
    for (std::size_t i = 0; i < meta.size(); ++i) {
        nlohmann::ordered_json j;
        j["token"] = i;
        j["episode"] = meta[i].episode_id;
        j["t"] = meta[i].timestep;
        if (!meta[i].events.empty()) j["events"] = meta[i].events;
        if (meta[i].thumbnail) j["thumbnail"] = *meta[i].thumbnail;
        out << j.dump() << '\n';
    }
    if (!out) throw MetaError("write failed: " + path);
}

void validate(const TokenCloud& cloud) {
    if (cloud.n < 1) throw IngestError("cloud has no tokens");
    if (cloud.metric == MetricKind::AmbientEuclidean) {
        if (cloud.d < 1) throw IngestError("ambient cloud needs D >= 1");
        if (cloud.coords.size() != cloud.n * cloud.d)
            throw IngestError("coordinate buffer size mismatch");
        for (double v : cloud.coords)
            if (!std::isfinite(v)) throw IngestError("non-finite coordinate");
    } else if (!cloud.oracle) {
        throw IngestError("oracle cloud without a distance oracle");
    }
    if (!cloud.meta.empty()) {
        if (cloud.meta.size() != cloud.n) throw MetaError("metadata length != N");
        validate_meta_records(cloud.meta);
    }
}

TokenCloud scaled(const TokenCloud& cloud, double lambda) {
    TokenCloud out = cloud;
    if (out.metric == MetricKind::AmbientEuclidean) {
        for (double& v : out.coords) v *= lambda;
    } else {
        auto base = cloud.oracle;
        out.oracle = [base, lambda](std::size_t i, std::size_t j) { return lambda * base(i, j); };
    }
    return out;
}

} // namespace strata_audit::corpus
