#include "rptsne/data_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <fstream>
#include <numeric>
#include <sstream>

#include "rptsne/rng.hpp"

namespace rptsne {

namespace {

std::vector<unsigned char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    return bytes;
}

std::uint32_t read_u32_be(const unsigned char* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) |
           std::uint32_t(p[3]);
}

double read_f64_le(const unsigned char* p) {
    std::uint64_t u = 0;
    for (int i = 7; i >= 0; --i) u = (u << 8) | p[i];
    return std::bit_cast<double>(u);
}

std::uint64_t read_u64_le(const unsigned char* p) {
    std::uint64_t u = 0;
    for (int i = 7; i >= 0; --i) u = (u << 8) | p[i];
    return u;
}

void write_f64_le(std::ostream& out, double v) {
    auto u = std::bit_cast<std::uint64_t>(v);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((u >> (8 * i)) & 0xFF);
    out.write(b, 8);
}

void write_u64_le(std::ostream& out, std::uint64_t u) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((u >> (8 * i)) & 0xFF);
    out.write(b, 8);
}

void check_data_matrix(const Matrix& x) {
    if (x.rows < 2) throw DataError("data matrix needs at least 2 rows, got " + std::to_string(x.rows));
    if (x.cols < 1) throw DataError("data matrix needs at least 1 column");
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* r = x.row(i);
        for (std::size_t j = 0; j < x.cols; ++j) {
            if (!std::isfinite(r[j])) {
                throw DataError("non-finite value at row " + std::to_string(i));
            }
        }
    }
}

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

struct Sidecar {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    bool labels = false;
};

Sidecar read_sidecar(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open sidecar: " + path);
    Sidecar sc;
    bool saw_rows = false, saw_cols = false;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw DataError("bad sidecar line: " + line);
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "n_rows") {
            sc.n_rows = std::stoull(val);
            saw_rows = true;
        } else if (key == "n_cols") {
            sc.n_cols = std::stoull(val);
            saw_cols = true;
        } else if (key == "labels") {
            if (val != "true" && val != "false") throw DataError("sidecar labels must be true/false");
            sc.labels = (val == "true");
        }
        // unknown keys are ignored so callers can stash extra metadata
    }
    if (!saw_rows || !saw_cols) throw DataError("sidecar missing n_rows/n_cols: " + path);
    return sc;
}

Matrix decode_raw(const std::vector<unsigned char>& bytes, const Sidecar& sc,
                  const std::string& path, LabelVector* labels_out) {
    const std::size_t matrix_bytes = sc.n_rows * sc.n_cols * 8;
    const std::size_t label_bytes = sc.labels ? sc.n_rows * 8 : 0;
    if (bytes.size() != matrix_bytes + label_bytes) {
        throw DataError("size mismatch in " + path + ": expected " +
                        std::to_string(matrix_bytes + label_bytes) + " bytes, found " +
                        std::to_string(bytes.size()));
    }
    Matrix x(sc.n_rows, sc.n_cols);
    for (std::size_t i = 0; i < sc.n_rows * sc.n_cols; ++i) {
        x.values[i] = read_f64_le(bytes.data() + i * 8);
    }
    if (labels_out != nullptr && sc.labels) {
        labels_out->resize(sc.n_rows);
        const unsigned char* p = bytes.data() + matrix_bytes;
        for (std::size_t i = 0; i < sc.n_rows; ++i) {
            (*labels_out)[i] = static_cast<std::int64_t>(read_u64_le(p + i * 8));
        }
    }
    return x;
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path, bool normalize) {
    const auto img = read_file(images_path);
    if (img.size() < 16) throw DataError("IDX image file too short: " + images_path);
    const std::uint32_t magic = read_u32_be(img.data());
    if (magic != 0x00000803u) {
        throw DataError("bad IDX image magic in " + images_path);
    }
    const std::size_t n = read_u32_be(img.data() + 4);
    const std::size_t rows = read_u32_be(img.data() + 8);
    const std::size_t cols = read_u32_be(img.data() + 12);
    if (img.size() - 16 != n * rows * cols) {
        throw DataError("IDX image payload truncated: header says " +
                        std::to_string(n * rows * cols) + " bytes, file holds " +
                        std::to_string(img.size() - 16));
    }

    const auto lab = read_file(labels_path);
    if (lab.size() < 8) throw DataError("IDX label file too short: " + labels_path);
    if (read_u32_be(lab.data()) != 0x00000801u) {
        throw DataError("bad IDX label magic in " + labels_path);
    }
    const std::size_t nl = read_u32_be(lab.data() + 4);
    if (lab.size() - 8 != nl) {
        throw DataError("IDX label payload truncated in " + labels_path);
    }
    if (nl != n) {
        throw DataError("image/label count mismatch: " + std::to_string(n) + " images vs " +
                        std::to_string(nl) + " labels");
    }

    Dataset ds;
    ds.x = Matrix(n, rows * cols);
    const double scale = normalize ? 1.0 / 255.0 : 1.0;
    for (std::size_t i = 0; i < n * rows * cols; ++i) {
        ds.x.values[i] = static_cast<double>(img[16 + i]) * scale;
    }
    ds.labels.resize(nl);
    for (std::size_t i = 0; i < nl; ++i) ds.labels[i] = lab[8 + i];
    check_data_matrix(ds.x);
    return ds;
}

Dataset load_raw(const std::string& matrix_path, const std::string& sidecar_path) {
    const Sidecar sc = read_sidecar(sidecar_path);
    const auto bytes = read_file(matrix_path);
    Dataset ds;
    ds.x = decode_raw(bytes, sc, matrix_path, &ds.labels);
    check_data_matrix(ds.x);
    return ds;
}

void write_raw(const std::string& matrix_path, const std::string& sidecar_path, const Matrix& x,
               const LabelVector* labels) {
    if (labels != nullptr && !labels->empty() && labels->size() != x.rows) {
        throw DataError("label count does not match row count");
    }
    const bool has_labels = labels != nullptr && !labels->empty();
    std::ofstream out(matrix_path, std::ios::binary);
    if (!out) throw DataError("cannot write " + matrix_path);
    for (double v : x.values) write_f64_le(out, v);
    if (has_labels) {
        for (std::int64_t l : *labels) write_u64_le(out, static_cast<std::uint64_t>(l));
    }
    out.close();

    std::ofstream side(sidecar_path);
    if (!side) throw DataError("cannot write " + sidecar_path);
    side << "n_rows=" << x.rows << "\n"
         << "n_cols=" << x.cols << "\n"
         << "labels=" << (has_labels ? "true" : "false") << "\n";
}

Matrix read_raw_matrix(const std::string& matrix_path, const std::string& sidecar_path) {
    const Sidecar sc = read_sidecar(sidecar_path);
    const auto bytes = read_file(matrix_path);
    return decode_raw(bytes, sc, matrix_path, nullptr);
}

void write_raw_matrix(const std::string& matrix_path, const std::string& sidecar_path,
                      const Matrix& x) {
    write_raw(matrix_path, sidecar_path, x, nullptr);
}

Dataset load_csv(const std::string& path, bool header, bool labels_last_column) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    Dataset ds;
    std::vector<double> values;
    std::size_t cols = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header && line_no == 1) continue;
        std::vector<std::string> fields;
        std::string field;
        std::stringstream ss(line);
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (line.back() == ',') fields.emplace_back();
        const std::size_t data_cols = fields.size() - (labels_last_column ? 1 : 0);
        if (cols == 0) {
            cols = data_cols;
        } else if (data_cols != cols) {
            throw DataError("ragged CSV row at line " + std::to_string(line_no));
        }
        try {
            for (std::size_t j = 0; j < data_cols; ++j) values.push_back(std::stod(fields[j]));
            if (labels_last_column) ds.labels.push_back(std::stoll(fields.back()));
        } catch (const std::exception&) {
            throw DataError("unparseable CSV field at line " + std::to_string(line_no));
        }
    }
    if (cols == 0) throw DataError("empty CSV: " + path);
    ds.x.rows = values.size() / cols;
    ds.x.cols = cols;
    ds.x.values = std::move(values);
    check_data_matrix(ds.x);
    return ds;
}

Dataset subsample(const Dataset& in, std::size_t m, std::uint64_t seed) {
    const std::size_t n = in.x.rows;
    if (m > n) throw UsageError("subsample size exceeds row count");
    if (m < 2) throw UsageError("subsample size must be at least 2");
    if (m == n) return in;

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(m);
    std::sort(idx.begin(), idx.end());

    Dataset out;
    out.x = Matrix(m, in.x.cols);
    for (std::size_t i = 0; i < m; ++i) {
        const double* src = in.x.row(idx[i]);
        std::copy(src, src + in.x.cols, out.x.row(i));
    }
    if (in.has_labels()) {
        out.labels.resize(m);
        for (std::size_t i = 0; i < m; ++i) out.labels[i] = in.labels[idx[i]];
    }
    return out;
}

void normalize255(Matrix& x) {
    for (double& v : x.values) v /= 255.0;
}

}  // namespace rptsne
