#include "ttda/tt_chain.hpp"

#include "ttda/tten_io.hpp"

#include <Eigen/SVD>

#include <json.hpp>

#include <fstream>
#include <iostream>
#include <stdexcept>

namespace ttda {

using nlohmann::json;

TTFactor::TTFactor(DenseTensor c, bool ortho) : core(std::move(c)), left_orthogonal(ortho) {
    if (core.order() != 3) throw std::invalid_argument("TT factor core must have 3 modes");
}

double TTFactor::orthogonality_error() const {
    const auto l = unfold_view(core, 2);
    const Matrix gram = l.transpose() * l;
    return (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

TTChain::TTChain(std::vector<TTFactor> factors) : factors_(std::move(factors)) {
    if (factors_.empty()) throw std::invalid_argument("TT chain needs at least one factor");
    for (std::size_t n = 0; n + 1 < factors_.size(); ++n) {
        if (factors_[n].rank_right() != factors_[n + 1].rank_left())
            throw std::invalid_argument("adjacent TT ranks are incompatible");
    }
}

const TTFactor& TTChain::factor(Index n) const {
    if (n < 0 || n >= length()) throw std::invalid_argument("factor index out of range");
    return factors_[static_cast<std::size_t>(n)];
}

TTFactor& TTChain::factor(Index n) {
    if (n < 0 || n >= length()) throw std::invalid_argument("factor index out of range");
    return factors_[static_cast<std::size_t>(n)];
}

Shape TTChain::mode_dims() const {
    Shape dims;
    for (const auto& f : factors_) dims.push_back(f.mode_dim());
    return dims;
}

std::vector<Index> TTChain::ranks() const {
    std::vector<Index> r{factors_.front().rank_left()};
    for (const auto& f : factors_) r.push_back(f.rank_right());
    return r;
}

namespace {

// One left-to-right sweep. Explicit mode when ranks != nullptr, else tau mode.
TTChain tt_svd_sweep(const DenseTensor& t, const std::vector<Index>* ranks, double tau) {
    const Index n_modes = t.order();
    if (n_modes < 1) throw std::invalid_argument("tt_svd needs at least one mode");
    if (ranks && static_cast<Index>(ranks->size()) != n_modes)
        throw std::invalid_argument("tt_svd expects one target rank per mode");
    if (!ranks && (tau <= 0.0 || tau > 1.0)) throw std::invalid_argument("tt_svd threshold must be in (0,1]");

    std::vector<TTFactor> factors;
    Matrix cur = unfold_view(t, 1);  // (R_0 * I_0) x rest, R_0 = 1
    Index r_prev = 1;

    for (Index n = 0; n < n_modes; ++n) {
        const Index rows = cur.rows();
        const Index cols = cur.cols();
        const Index data_rank = std::min(rows, cols);

        Index target = 0;
        bool need_full_u = false;
        if (ranks) {
            target = (*ranks)[static_cast<std::size_t>(n)];
            if (target < 1) throw std::invalid_argument("tt_svd ranks must be positive");
            if (target > rows) {
                std::cerr << "tt_svd: requested rank " << target << " at bond " << n + 1
                          << " exceeds feasible bound " << rows << "; capping\n";
                target = rows;
            }
            need_full_u = target > data_rank;
        }

        Eigen::BDCSVD<Matrix> svd(cur, need_full_u ? (Eigen::ComputeFullU | Eigen::ComputeThinV)
                                                   : (Eigen::ComputeThinU | Eigen::ComputeThinV));
        const Vector& sv = svd.singularValues();

        Index rank;
        if (ranks) {
            rank = target;
        } else if (sv(0) <= 0.0) {
            rank = 1;  // zero input still gives a well-formed chain
        } else {
            const double cutoff = tau * sv(0);
            rank = 0;
            for (Index i = 0; i < sv.size(); ++i) {
                if (sv(i) >= cutoff) ++rank;
            }
            if (rank < 1) rank = 1;
        }

        const Matrix u = svd.matrixU().leftCols(rank);
        DenseTensor core({r_prev, rows / r_prev, rank}, Eigen::Map<const Vector>(u.data(), u.size()));
        factors.emplace_back(std::move(core), true);

        if (n + 1 < n_modes) {
            const Index kept = std::min(rank, data_rank);
            Matrix next(rank, cols);
            next.setZero();
            next.topRows(kept) =
                sv.head(kept).asDiagonal() * svd.matrixV().leftCols(kept).transpose();
            const Index next_dim = t.dim(n + 1);
            cur = Eigen::Map<const Matrix>(next.data(), rank * next_dim, cols / next_dim);
            r_prev = rank;
        }
    }
    return TTChain(std::move(factors));
}

}  // namespace

TTChain tt_svd(const DenseTensor& t, const std::vector<Index>& ranks) {
    return tt_svd_sweep(t, &ranks, 0.0);
}

TTChain tt_svd(const DenseTensor& t, double tau) { return tt_svd_sweep(t, nullptr, tau); }

DenseTensor chain_contract(const TTChain& chain, Index from, Index to) {
    if (from < 0 || to >= chain.length() || from > to)
        throw std::invalid_argument("chain_contract: invalid factor range");
    DenseTensor acc = chain.factor(from).core;
    for (Index n = from + 1; n <= to; ++n) {
        acc = contract(acc, chain.factor(n).core, {acc.order() - 1}, {0});
    }
    return acc;
}

Matrix subspace_matrix(const TTChain& chain) {
    if (chain.rank_left() != 1)
        throw std::invalid_argument("subspace_matrix requires a chain with leading rank 1");
    const DenseTensor full = chain_contract(chain, 0, chain.length() - 1);
    const Index cols = chain.rank_right();
    return Eigen::Map<const Matrix>(full.data(), full.size() / cols, cols);
}

Vector project(const Matrix& u, const DenseTensor& y) {
    if (y.size() != u.rows()) throw std::invalid_argument("project: size does not match subspace rows");
    return u.transpose() * vector_view(y);
}

DenseTensor reconstruct(const Matrix& u, const DenseTensor& y, const Shape& shape) {
    Vector v = u * project(u, y);
    return DenseTensor(shape, std::move(v));
}

void save_chain(const TTChain& chain, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    json header;
    header["factor_count"] = chain.length();
    header["ranks"] = chain.ranks();
    json flags = json::array();
    for (const auto& f : chain.factors()) flags.push_back(f.left_orthogonal);
    header["left_orthogonal"] = flags;
    std::ofstream out(dir / "header.json");
    if (!out) throw std::runtime_error("cannot write chain header in " + dir.string());
    out << header.dump(2) << "\n";

    char name[32];
    for (Index n = 0; n < chain.length(); ++n) {
        std::snprintf(name, sizeof(name), "core_%03d.tten", static_cast<int>(n));
        write_tten(chain.factor(n).core, dir / name);
    }
}

TTChain load_chain(const std::filesystem::path& dir) {
    std::ifstream in(dir / "header.json");
    if (!in) throw std::runtime_error("cannot read chain header in " + dir.string());
    json header = json::parse(in);
    const Index count = header.at("factor_count").get<Index>();
    const auto flags = header.at("left_orthogonal").get<std::vector<bool>>();

    std::vector<TTFactor> factors;
    char name[32];
    for (Index n = 0; n < count; ++n) {
        std::snprintf(name, sizeof(name), "core_%03d.tten", static_cast<int>(n));
        DenseTensor core = read_tten(dir / name);
        factors.emplace_back(std::move(core), flags.at(static_cast<std::size_t>(n)));
    }
    return TTChain(std::move(factors));
}

}  // namespace ttda
