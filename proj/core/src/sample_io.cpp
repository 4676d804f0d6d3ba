#include "criticbench/data/sample_io.hpp"

#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "criticbench/errors.hpp"

namespace criticbench::data {

namespace {

constexpr char kMagic[4] = {'C', 'B', 'S', '1'};

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

// Cursor over a loaded byte buffer with truncation checks.
class Reader {
public:
    Reader(const std::string& buf, const std::string& path) : buf_(buf), path_(path) {}

    const char* take(std::size_t count, const char* what) {
        if (pos_ + count > buf_.size()) {
            throw io_error(io_error::kind::truncated,
                           path_ + ": truncated while reading " + std::string(what));
        }
        const char* p = buf_.data() + pos_;
        pos_ += count;
        return p;
    }

    std::uint16_t u16(const char* what) {
        const unsigned char* p = reinterpret_cast<const unsigned char*>(take(2, what));
        return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
    }

    std::uint32_t u32(const char* what) {
        const unsigned char* p = reinterpret_cast<const unsigned char*>(take(4, what));
        return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
               (static_cast<std::uint32_t>(p[2]) << 16) |
               (static_cast<std::uint32_t>(p[3]) << 24);
    }

    double f64(const char* what) {
        const unsigned char* p = reinterpret_cast<const unsigned char*>(take(8, what));
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
        double v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }

    bool exhausted() const noexcept { return pos_ == buf_.size(); }

private:
    const std::string& buf_;
    std::string path_;
    std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error(io_error::kind::not_found, path.string() + ": cannot open for reading");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw io_error(io_error::kind::not_found, path.string() + ": cannot open for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw io_error(io_error::kind::truncated, path.string() + ": short write");
    }
}

} // namespace

void save_samples(const SampleSet& samples, const std::filesystem::path& path) {
    const std::size_t n = samples.size();
    const std::size_t d = samples.dim();
    if (n < 1 || d < 1) {
        throw io_error(io_error::kind::invariant, path.string() + ": n >= 1, d >= 1 violated");
    }
    if (n > std::numeric_limits<std::uint32_t>::max() ||
        d > std::numeric_limits<std::uint32_t>::max()) {
        throw io_error(io_error::kind::invariant,
                       path.string() + ": dimension overflows the u32 header field");
    }
    const std::string& label = samples.source_label();
    if (label.size() > std::numeric_limits<std::uint16_t>::max()) {
        throw io_error(io_error::kind::invariant,
                       path.string() + ": source label exceeds 65535 bytes");
    }

    std::string out;
    out.reserve(4 + 4 + 4 + 1 + 2 + label.size() + n * d * 8);
    out.append(kMagic, sizeof kMagic);
    put_u32(out, static_cast<std::uint32_t>(n));
    put_u32(out, static_cast<std::uint32_t>(d));
    out.push_back(static_cast<char>(samples.role()));
    put_u16(out, static_cast<std::uint16_t>(label.size()));
    out.append(label);
    for (double v : samples.data().data()) put_f64(out, v);
    write_file(path, out);
}

SampleSet load_samples(const std::filesystem::path& path) {
    const std::string buf = read_file(path);
    Reader r(buf, path.string());

    const char* magic = r.take(4, "magic");
    if (std::memcmp(magic, kMagic, 4) != 0) {
        throw io_error(io_error::kind::bad_magic, path.string() + ": bad magic (not a .cbs file)");
    }
    const std::uint32_t n = r.u32("sample count");
    const std::uint32_t d = r.u32("dimension");
    if (n < 1 || d < 1) {
        throw io_error(io_error::kind::bad_header,
                       path.string() + ": header invariant n >= 1, d >= 1 violated");
    }
    const unsigned char role_code =
        static_cast<unsigned char>(*r.take(1, "role code"));
    if (role_code > 2) {
        throw io_error(io_error::kind::bad_header,
                       path.string() + ": role code " + std::to_string(role_code) +
                           " out of range");
    }
    const std::uint16_t label_len = r.u16("label length");
    const char* label_bytes = r.take(label_len, "label");
    std::string label(label_bytes, label_len);

    ad::Tensor data = ad::Tensor::zeros({n, d});
    for (std::size_t i = 0; i < static_cast<std::size_t>(n) * d; ++i) {
        data[i] = r.f64("sample payload");
    }
    if (!r.exhausted()) {
        throw io_error(io_error::kind::bad_header,
                       path.string() + ": trailing bytes after payload");
    }
    if (!data.all_finite()) {
        throw io_error(io_error::kind::invariant,
                       path.string() + ": payload contains non-finite values");
    }
    return SampleSet(std::move(data), static_cast<Role>(role_code), std::move(label));
}

void save_samples_csv(const SampleSet& samples, const std::filesystem::path& path,
                      bool header) {
    std::string out;
    const std::size_t n = samples.size();
    const std::size_t d = samples.dim();
    if (header) {
        for (std::size_t j = 0; j < d; ++j) {
            if (j) out.push_back(',');
            out += "x" + std::to_string(j);
        }
        out.push_back('\n');
    }
    char buf[64];
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            if (j) out.push_back(',');
            // %.17g is the shortest format guaranteed to round-trip a double
            std::snprintf(buf, sizeof buf, "%.17g", samples.data().at(i, j));
            out += buf;
        }
        out.push_back('\n');
    }
    write_file(path, out);
}

SampleSet load_samples_csv(const std::filesystem::path& path, Role role,
                           const std::string& label) {
    const std::string buf = read_file(path);
    std::vector<double> values;
    std::size_t d = 0;
    std::size_t n = 0;

    std::size_t line_start = 0;
    bool first_line = true;
    while (line_start < buf.size()) {
        std::size_t line_end = buf.find('\n', line_start);
        if (line_end == std::string::npos) line_end = buf.size();
        std::string_view line(buf.data() + line_start, line_end - line_start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        line_start = line_end + 1;
        if (line.empty()) continue;

        std::vector<double> row;
        bool numeric = true;
        std::size_t field_start = 0;
        while (field_start <= line.size()) {
            std::size_t field_end = line.find(',', field_start);
            if (field_end == std::string_view::npos) field_end = line.size();
            std::string_view field = line.substr(field_start, field_end - field_start);
            // trim surrounding spaces
            while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
            while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
            if (ec != std::errc{} || ptr != field.data() + field.size()) {
                numeric = false;
                break;
            }
            row.push_back(v);
            if (field_end == line.size()) break;
            field_start = field_end + 1;
        }

        if (!numeric) {
            if (first_line) { // optional header row
                first_line = false;
                continue;
            }
            throw io_error(io_error::kind::bad_header,
                           path.string() + ": non-numeric field at data row " +
                               std::to_string(n + 1));
        }
        first_line = false;
        if (d == 0) {
            d = row.size();
        } else if (row.size() != d) {
            throw io_error(io_error::kind::bad_header,
                           path.string() + ": row " + std::to_string(n + 1) + " has " +
                               std::to_string(row.size()) + " fields, expected " +
                               std::to_string(d));
        }
        values.insert(values.end(), row.begin(), row.end());
        ++n;
    }

    if (n == 0 || d == 0) {
        throw io_error(io_error::kind::bad_header, path.string() + ": no data rows");
    }
    return SampleSet(ad::Tensor({n, d}, std::move(values)), role, label);
}

} // namespace criticbench::data
