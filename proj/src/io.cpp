#include "qtc/io.hpp"

#include <fstream>
#include <sstream>

namespace qtc {

ParseError::ParseError(const std::string& what, int l, int c) : InvalidInput(what), line(l), column(c) {}

namespace {

void line_column(const std::string& text, std::size_t offset, int& line, int& col)
{
    line = 1;
    col = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
}

double number(const Json& j, const std::string& where)
{
    if (!j.is_number()) throw InvalidInput(where + ": expected a number");
    double v = j.get<double>();
    if (!std::isfinite(v)) throw InvalidInput(where + ": non-finite number");
    return v;
}

RMatrix real_block(const Json& j, int d, const std::string& where)
{
    if (!j.is_array() || static_cast<int>(j.size()) != d)
        throw InvalidInput(where + ": expected " + std::to_string(d) + " rows");
    RMatrix m(d, d);
    for (int r = 0; r < d; ++r) {
        const Json& row = j[r];
        if (!row.is_array() || static_cast<int>(row.size()) != d)
            throw InvalidInput(where + ": row " + std::to_string(r) + " must have " + std::to_string(d) + " entries");
        for (int c = 0; c < d; ++c) m(r, c) = number(row[c], where + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
    return m;
}

}  // namespace

Json parse_json(const std::string& text, const std::string& origin)
{
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        int line, col;
        // byte is the 1-based position of the offending character
        line_column(text, e.byte > 0 ? e.byte - 1 : 0, line, col);
        std::string msg = e.what();
        auto pos = msg.find("syntax error");
        if (pos != std::string::npos) msg = msg.substr(pos);
        throw ParseError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + msg, line, col);
    }
}

Json load_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_json(ss.str(), path);
}

void save_json(const std::string& path, const Json& j)
{
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write " + path);
    out << j.dump(2) << "\n";
}

Json to_json(const Matrix& m)
{
    const int d = static_cast<int>(m.rows());
    Json re = Json::array(), im = Json::array();
    for (int r = 0; r < d; ++r) {
        Json a = Json::array(), b = Json::array();
        for (int c = 0; c < d; ++c) {
            a.push_back(m(r, c).real());
            b.push_back(m(r, c).imag());
        }
        re.push_back(a);
        im.push_back(b);
    }
    return Json{{"d", d}, {"re", re}, {"im", im}};
}

Matrix matrix_from_json(const Json& j, const std::string& where)
{
    if (!j.is_object()) throw InvalidInput(where + ": expected an object with d, re, im");
    if (!j.contains("d") || !j["d"].is_number_integer()) throw InvalidInput(where + ": missing integer field 'd'");
    int d = j["d"].get<int>();
    if (d < 1) throw InvalidInput(where + ": dimension must be positive");
    if (d > kMaxFileDim)
        throw ResourceLimit(where + ": dimension " + std::to_string(d) + " exceeds cap " + std::to_string(kMaxFileDim));
    if (!j.contains("re")) throw InvalidInput(where + ": missing field 're'");
    RMatrix re = real_block(j["re"], d, where + ".re");
    RMatrix im = j.contains("im") ? real_block(j["im"], d, where + ".im") : RMatrix::Zero(d, d);
    Matrix m(d, d);
    m.real() = re;
    m.imag() = im;
    return m;
}

DensityMatrix density_from_json(const Json& j, const std::string& where)
{
    Matrix m = matrix_from_json(j, where);
    try {
        return DensityMatrix(m, 1e-9);
    } catch (const InvalidInput& e) {
        throw InvalidInput(where + ": " + e.what());
    }
}

HermitianOperator hermitian_from_json(const Json& j, const std::string& where)
{
    Matrix m = matrix_from_json(j, where);
    if (!is_hermitian(m, 1e-10)) throw InvalidInput(where + ": not self-adjoint");
    return HermitianOperator(hermitian_part(m), 1e-10);
}

Json to_json(const DBGenerator& gen)
{
    Json terms = Json::array();
    for (const Term& t : gen.terms()) terms.push_back(Json{{"c", t.c}, {"omega", t.omega}, {"L", to_json(t.L)}});
    return Json{{"sigma", to_json(gen.sigma().matrix())}, {"terms", terms}, {"lipschitz_dim", gen.lipschitz_dim()}};
}

DBGenerator generator_from_json(const Json& j)
{
    if (!j.is_object()) throw InvalidInput("generator: expected an object");
    if (j.contains("depolarizing")) return depolarizing_generator(density_from_json(j["depolarizing"], "depolarizing"));
    if (!j.contains("sigma")) throw InvalidInput("generator: missing field 'sigma'");
    if (!j.contains("terms") || !j["terms"].is_array()) throw InvalidInput("generator: missing array 'terms'");
    DensityMatrix sigma = density_from_json(j["sigma"], "sigma");
    std::vector<Term> terms;
    for (std::size_t i = 0; i < j["terms"].size(); ++i) {
        const Json& t = j["terms"][i];
        std::string w = "terms[" + std::to_string(i) + "]";
        if (!t.is_object() || !t.contains("c") || !t.contains("omega") || !t.contains("L"))
            throw InvalidInput(w + ": expected {c, omega, L}");
        Term term{number(t["c"], w + ".c"), number(t["omega"], w + ".omega"), matrix_from_json(t["L"], w + ".L")};
        if (term.L.rows() != sigma.dim()) throw InvalidInput(w + ".L: dimension differs from sigma");
        terms.push_back(std::move(term));
    }
    int lip = 0;
    if (j.contains("lipschitz_dim")) {
        if (!j["lipschitz_dim"].is_number_integer()) throw InvalidInput("lipschitz_dim: expected an integer");
        lip = j["lipschitz_dim"].get<int>();
    }
    return DBGenerator(std::move(sigma), std::move(terms), lip);
}

DBGenerator load_generator(const std::string& path) { return generator_from_json(load_json(path)); }

}  // namespace qtc
