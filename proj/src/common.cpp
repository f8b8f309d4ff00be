#include "dsaeem/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dsaeem {

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

std::uint64_t Rng::next() { return engine_(); }

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::size_t Rng::below(std::size_t n)
{
    const std::uint64_t bound = n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r;
    do {
        r = next();
    } while (r >= limit);
    return static_cast<std::size_t>(r % bound);
}

double Rng::exponential()
{
    double u;
    do {
        u = uniform();
    } while (u <= 0.0);
    return -std::log(u);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream)
{
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

int count_classes(const Labels& labels)
{
    if (labels.empty())
        return 0;
    return *std::max_element(labels.begin(), labels.end()) + 1;
}

Matrix take_rows(const Matrix& x, const IndexList& rows)
{
    Matrix out(static_cast<Index>(rows.size()), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.row(static_cast<Index>(i)) = x.row(rows[i]);
    return out;
}

Matrix take_cols(const Matrix& x, const IndexList& cols)
{
    Matrix out(x.rows(), static_cast<Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j)
        out.col(static_cast<Index>(j)) = x.col(cols[j]);
    return out;
}

Labels take(const Labels& labels, const IndexList& rows)
{
    Labels out;
    out.reserve(rows.size());
    for (Index r : rows)
        out.push_back(labels[static_cast<std::size_t>(r)]);
    return out;
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

} // namespace dsaeem
