#include "stmmc/ingest.hpp"

#include "stmmc/io.hpp"
#include "stmmc/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace stmmc {

namespace {

void check_unique(const std::vector<std::string>& ids, const std::string& what) {
    std::unordered_set<std::string> seen;
    for (const auto& id : ids) {
        if (!seen.insert(id).second) {
            throw DataError("duplicate " + what + ": " + id);
        }
    }
}

std::string cell_context(const Table& t, std::size_t row, std::size_t col) {
    return t.path + " line " + std::to_string(t.line_numbers[row]) + " (row " + std::to_string(row + 1) + ", col " +
           std::to_string(col + 1) + ")";
}

/// Parses a "spot_id,<c_1>,...,<c_k>" table into ids and a dense block.
void read_numeric_table(const Table& t, std::vector<std::string>& ids, Matrix& values) {
    if (t.header.size() < 2 || t.header.front() != "spot_id") {
        throw DataError(t.path + ": malformed header, expected 'spot_id' followed by at least one column");
    }
    const auto cols = t.header.size() - 1;
    values.resize(static_cast<Index>(t.rows.size()), static_cast<Index>(cols));
    ids.clear();
    ids.reserve(t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        if (row.size() != t.header.size()) {
            throw DataError(t.path + " line " + std::to_string(t.line_numbers[r]) + ": expected " +
                            std::to_string(t.header.size()) + " fields, found " + std::to_string(row.size()));
        }
        ids.push_back(row[0]);
        for (std::size_t c = 0; c < cols; ++c) {
            values(static_cast<Index>(r), static_cast<Index>(c)) = parse_real(row[c + 1], cell_context(t, r, c + 1));
        }
    }
    std::unordered_set<std::string> seen;
    for (std::size_t r = 0; r < ids.size(); ++r) {
        if (!seen.insert(ids[r]).second) {
            throw DataError(t.path + " line " + std::to_string(t.line_numbers[r]) + ": duplicate spot_id " + ids[r]);
        }
    }
}

Matrix reorder_rows(const Matrix& m, const std::vector<Index>& order) {
    Matrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < order.size(); ++i) {
        out.row(static_cast<Index>(i)) = m.row(order[i]);
    }
    return out;
}

std::string ids_and_rows(const std::string& header, const std::vector<std::string>& ids, const Matrix& values) {
    std::string out = header;
    out += '\n';
    for (Index i = 0; i < values.rows(); ++i) {
        out += ids[static_cast<std::size_t>(i)];
        for (Index j = 0; j < values.cols(); ++j) {
            out += ',';
            out += format_real(values(i, j));
        }
        out += '\n';
    }
    return out;
}

} // namespace

void ExpressionMatrix::validate() const {
    if (values.rows() < 1 || values.cols() < 1) {
        throw DataError("expression matrix must have at least one spot and one gene");
    }
    if (static_cast<Index>(spot_ids.size()) != values.rows() || static_cast<Index>(gene_ids.size()) != values.cols()) {
        throw DataError("expression matrix ids do not match its shape " + shape_string(values.rows(), values.cols()));
    }
    for (Index i = 0; i < values.rows(); ++i) {
        for (Index j = 0; j < values.cols(); ++j) {
            const double v = values(i, j);
            if (!std::isfinite(v)) {
                throw DataError("non-finite expression at (" + std::to_string(i + 1) + ", " + std::to_string(j + 1) + ")");
            }
            if (v < 0.0) {
                throw DataError("negative expression at (" + std::to_string(i + 1) + ", " + std::to_string(j + 1) + ")");
            }
        }
    }
    check_unique(spot_ids, "spot_id");
    check_unique(gene_ids, "gene_id");
}

void CoordinateSet::validate() const {
    if (coords.cols() != 2 || static_cast<Index>(spot_ids.size()) != coords.rows()) {
        throw DataError("coordinate set must be N x 2 with one id per row");
    }
    if (!coords.allFinite()) {
        throw DataError("non-finite coordinate");
    }
    check_unique(spot_ids, "spot_id");
    std::map<std::pair<double, double>, std::size_t> seen;
    for (Index i = 0; i < coords.rows(); ++i) {
        const auto [it, inserted] = seen.emplace(std::pair{coords(i, 0), coords(i, 1)}, static_cast<std::size_t>(i));
        if (!inserted) {
            throw DataError("spots " + spot_ids[it->second] + " and " + spot_ids[static_cast<std::size_t>(i)] +
                            " share identical coordinates");
        }
    }
}

void FeatureMatrix::validate() const {
    if (values.cols() < 1) {
        throw DataError("feature matrix must have at least one column");
    }
    if (static_cast<Index>(spot_ids.size()) != values.rows()) {
        throw DataError("feature matrix ids do not match its row count");
    }
    if (!values.allFinite()) {
        throw DataError("non-finite image feature");
    }
}

ExpressionMatrix read_expression(const std::filesystem::path& path) {
    const Table t = read_table(path);
    ExpressionMatrix expr;
    read_numeric_table(t, expr.spot_ids, expr.values);
    expr.gene_ids.assign(t.header.begin() + 1, t.header.end());
    if (expr.values.rows() == 0) {
        throw DataError(t.path + ": no spots");
    }
    check_unique(expr.gene_ids, "gene_id in " + t.path);
    for (Index i = 0; i < expr.values.rows(); ++i) {
        for (Index j = 0; j < expr.values.cols(); ++j) {
            if (expr.values(i, j) < 0.0) {
                throw DataError("negative expression at (" + std::to_string(i + 1) + ", " + std::to_string(j + 1) +
                                ") in " + t.path + " line " + std::to_string(t.line_numbers[static_cast<std::size_t>(i)]));
            }
        }
    }
    return expr;
}

CoordinateSet read_coordinates(const std::filesystem::path& path) {
    const Table t = read_table(path);
    if (t.header.size() != 3 || t.header[0] != "spot_id" || t.header[1] != "x" || t.header[2] != "y") {
        throw DataError(t.path + ": malformed header, expected 'spot_id,x,y'");
    }
    CoordinateSet cs;
    read_numeric_table(t, cs.spot_ids, cs.coords);
    cs.validate();
    return cs;
}

FeatureMatrix read_features(const std::filesystem::path& path) {
    const Table t = read_table(path);
    FeatureMatrix fm;
    read_numeric_table(t, fm.spot_ids, fm.values);
    fm.source = FeatureSource::precomputed;
    fm.validate();
    return fm;
}

std::vector<Index> alignment_order(const std::vector<std::string>& reference, const std::vector<std::string>& ids,
                                   const std::string& what) {
    std::unordered_map<std::string, Index> position;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        position.emplace(ids[i], static_cast<Index>(i));
    }
    std::vector<Index> order;
    order.reserve(reference.size());
    for (const auto& id : reference) {
        const auto it = position.find(id);
        if (it == position.end()) {
            throw DataError("spot " + id + " missing from " + what);
        }
        order.push_back(it->second);
    }
    if (ids.size() != reference.size()) {
        std::unordered_set<std::string> ref(reference.begin(), reference.end());
        for (const auto& id : ids) {
            if (!ref.count(id)) {
                throw DataError("spot " + id + " in " + what + " has no expression row");
            }
        }
    }
    return order;
}

Dataset load_dataset(const std::filesystem::path& expr_path, const std::filesystem::path& coord_path,
                     const std::optional<std::filesystem::path>& feat_path) {
    Dataset ds;
    ds.expression = read_expression(expr_path);
    ds.expression.validate();

    CoordinateSet coords = read_coordinates(coord_path);
    const auto order = alignment_order(ds.expression.spot_ids, coords.spot_ids, coord_path.string());
    ds.coordinates.coords = reorder_rows(coords.coords, order);
    ds.coordinates.spot_ids = ds.expression.spot_ids;

    if (feat_path) {
        FeatureMatrix feats = read_features(*feat_path);
        const auto forder = alignment_order(ds.expression.spot_ids, feats.spot_ids, feat_path->string());
        FeatureMatrix aligned;
        aligned.values = reorder_rows(feats.values, forder);
        aligned.spot_ids = ds.expression.spot_ids;
        aligned.source = FeatureSource::precomputed;
        ds.features = std::move(aligned);
    }
    return ds;
}

FeatureMatrix extract_patch_features(const RgbImage& image, const CoordinateSet& coords, int patch_width) {
    if (patch_width < 1) {
        throw DataError("patch width must be at least 1");
    }
    if (image.width < 1 || image.height < 1 ||
        image.pixels.size() != static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height) * 3) {
        throw DataError("non-RGB raster: pixel buffer does not match width x height x 3");
    }
    const Index n = coords.size();
    for (Index i = 0; i < n; ++i) {
        const double x = coords.coords(i, 0);
        const double y = coords.coords(i, 1);
        if (!(x >= 0.0 && x < image.width && y >= 0.0 && y < image.height)) {
            throw DataError("coordinate of spot " + coords.spot_ids[static_cast<std::size_t>(i)] + " (" + format_real(x) +
                            ", " + format_real(y) + ") lies outside the " + std::to_string(image.width) + "x" +
                            std::to_string(image.height) + " image");
        }
    }

    FeatureMatrix out;
    out.values.resize(n, patch_feature_count);
    out.spot_ids = coords.spot_ids;
    out.source = FeatureSource::patch_stats;

    parallel_for(static_cast<std::size_t>(n), [&](std::size_t s) {
        const auto i = static_cast<Index>(s);
        const int cx = static_cast<int>(std::floor(coords.coords(i, 0)));
        const int cy = static_cast<int>(std::floor(coords.coords(i, 1)));
        const int x0 = std::max(0, cx - patch_width / 2);
        const int y0 = std::max(0, cy - patch_width / 2);
        const int x1 = std::min(image.width, cx - patch_width / 2 + patch_width);
        const int y1 = std::min(image.height, cy - patch_width / 2 + patch_width);
        for (int c = 0; c < 3; ++c) {
            double sum = 0.0;
            int lo = 255;
            int hi = 0;
            for (int y = y0; y < y1; ++y) {
                for (int x = x0; x < x1; ++x) {
                    const int v = image.at(x, y, c);
                    sum += v;
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
            }
            const double count = static_cast<double>(x1 - x0) * static_cast<double>(y1 - y0);
            const double mean = sum / count;
            double ss = 0.0;
            for (int y = y0; y < y1; ++y) {
                for (int x = x0; x < x1; ++x) {
                    const double d = image.at(x, y, c) - mean;
                    ss += d * d;
                }
            }
            out.values(i, c) = mean / 255.0;
            out.values(i, 3 + c) = std::sqrt(ss / count) / 255.0;
            out.values(i, 6 + c) = lo / 255.0;
            out.values(i, 9 + c) = hi / 255.0;
        }
    });
    return out;
}

std::string expression_csv(const ExpressionMatrix& expr) {
    std::string header = "spot_id";
    for (const auto& g : expr.gene_ids) {
        header += ',';
        header += g;
    }
    return ids_and_rows(header, expr.spot_ids, expr.values);
}

std::string coordinates_csv(const CoordinateSet& coords) {
    return ids_and_rows("spot_id,x,y", coords.spot_ids, coords.coords);
}

std::string features_csv(const FeatureMatrix& feats) {
    std::string header = "spot_id";
    for (Index j = 0; j < feats.values.cols(); ++j) {
        header += ",f_" + std::to_string(j + 1);
    }
    return ids_and_rows(header, feats.spot_ids, feats.values);
}

} // namespace stmmc
