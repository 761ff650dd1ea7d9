#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

using namespace fedq;
using namespace fedq::testing;

namespace {

ChartPtr chart(int order = 6) { return Chart::standard(1, order); }

WeylForm W(const std::string& s, const ChartPtr& c) { return parse_weyl(s, c); }

WeylForm form_degree_part(const WeylForm& a, int k) {
    WeylForm r(a.ctx(), a.order());
    for (const auto& [key, c] : a.terms())
        if (key.form_degree() == k) r.add_term(key, c);
    return r;
}

}  // namespace

TEST_CASE("moyal product examples") {
    auto c = chart();
    CHECK(moyal_mul(WeylForm::y(c, 0), WeylForm::y(c, 1)) == W("y1*y2 + 1/2*h", c));
    CHECK(moyal_mul(WeylForm::y(c, 1), WeylForm::y(c, 0)) == W("y1*y2 - 1/2*h", c));
    WeylForm a = W("x1*y1^2*dx2 + 3*y2*h - x2", c);
    CHECK(moyal_mul(a, WeylForm::constant(c, Rational(1))) == a);
    WeylForm f = WeylForm::scalar(c, P("x1 - 2*x2^2"));
    CHECK(moyal_mul(f, a) == P("x1 - 2*x2^2") * a);
    CHECK_THROWS_AS(moyal_mul(a, WeylForm::y(Chart::standard(2, 6), 0)), ContextMismatch);
}

TEST_CASE("graded commutator examples") {
    auto c = chart();
    CHECK(graded_commutator(WeylForm::y(c, 0), WeylForm::y(c, 1)) == WeylForm::hbar(c));
    WeylForm even = W("y1^2*x2 + y1*y2*dx1*dx2 + h*y2", c);
    CHECK(graded_commutator(even, even).is_zero());
    WeylForm f = W("x1*x2 + h*dx1", c);
    CHECK(graded_commutator(f, W("y1^3 + y2*dx2", c)).is_zero());
}

TEST_CASE("delta operators on examples") {
    auto c = chart();
    CHECK(op_delta(WeylForm::y(c, 0)) == WeylForm::dx(c, 0).truncated(5));
    CHECK(op_delta(W("y1*y2", c)) == W("y2*dx1 + y1*dx2", c).truncated(5));
    CHECK(op_delta(W("x1^2 + h", c)).is_zero());
    CHECK(op_delta_star(WeylForm::dx(c, 0)) == WeylForm::y(c, 0).truncated(7));
    CHECK(op_delta_star(W("x1*x2", c)).is_zero());
    CHECK(op_delta_star(W("y1*dx2", c)) == W("y1*y2", c).truncated(7));
    CHECK(op_delta_inv(WeylForm::dx(c, 0)) == WeylForm::y(c, 0).truncated(7));
    CHECK(op_delta_inv(WeylForm::constant(c, Rational(5))).is_zero());
    WeylForm y1 = WeylForm::y(c, 0);
    CHECK((op_delta(op_delta_inv(y1)) + op_delta_inv(op_delta(y1))).truncated(6) == y1);
}

TEST_CASE("sigma, center test and truncation examples") {
    auto c = chart();
    CHECK(sigma_project(W("x1 + y1", c)) == W("x1", c));
    CHECK(sigma_project(W("x1*x2 - 3", c)) == W("x1*x2 - 3", c));
    CHECK(sigma_project(W("y1*y2 + 1/2*h", c)) == W("1/2*h", c));
    CHECK(center_test(W("h*dx1", c)));
    CHECK_FALSE(center_test(WeylForm::y(c, 0)));
    CHECK(center_test(W("x1*x2", c)));
    CHECK(truncate(W("y1*y2 + y1^3 + h*y2", c), 1).is_zero());
    WeylForm a = W("y1*y2 + y1^3 + h*y2 + x1", c);
    CHECK(truncate(truncate(a, 3), 3) == truncate(a, 3));
    CHECK(truncate(W("x1", c), 0) == W("x1", c).truncated(0));
    CHECK_FALSE(truncate(W("x1", c), 0).is_zero());
}

TEST_CASE("moyal product matches the exponential series oracle on 0-forms") {
    auto c = chart(8);
    Sampler rs(21);
    for (int s = 0; s < 20; ++s) {
        WeylForm a = form_degree_part(rs.form(c, 8, 4, 0, 2), 0);
        WeylForm b = form_degree_part(rs.form(c, 8, 4, 0, 2), 0);
        CHECK(moyal_mul(a, b) == fiber_moyal_oracle(a, b, 8));
    }
    auto c4 = Chart::standard(2, 6);
    Sampler rs4(22);
    for (int s = 0; s < 10; ++s) {
        WeylForm a = form_degree_part(rs4.form(c4, 6, 4, 0, 1), 0);
        WeylForm b = form_degree_part(rs4.form(c4, 6, 4, 0, 1), 0);
        CHECK(moyal_mul(a, b) == fiber_moyal_oracle(a, b, 6));
    }
}

TEST_CASE("associativity up to truncation, including h^-1 terms") {
    for (int n : {1, 2}) {
        auto c = Chart::standard(n, 6);
        Sampler rs(30 + static_cast<std::uint64_t>(n));
        for (int s = 0; s < 10; ++s) {
            WeylForm a = rs.form(c, 6, 4, 2, 1, true), b = rs.form(c, 6, 4, 2, 1, true), e = rs.form(c, 6, 4, 2, 1, true);
            CHECK(moyal_mul(moyal_mul(a, b), e) == moyal_mul(a, moyal_mul(b, e)));
        }
    }
}

TEST_CASE("delta identities on random forms") {
    for (int n : {1, 2}) {
        auto c = Chart::standard(n, 7);
        Sampler rs(40 + static_cast<std::uint64_t>(n));
        WeylForm gen = delta_generator(c, 7);
        for (int s = 0; s < 15; ++s) {
            WeylForm a = rs.form(c, 7, 5, 3, 2, true), b = rs.form(c, 7, 5, 3, 2, true);
            CHECK(op_delta(op_delta(a)).is_zero());
            CHECK(op_delta_star(op_delta_star(a)).is_zero());
            CHECK((op_delta(op_delta_inv(a)) + op_delta_inv(op_delta(a)) + scalar_part(a)).truncated(7) == a);
            int k = rs.uniform(0, 2);
            WeylForm ak = form_degree_part(a, k);
            WeylForm lhs = op_delta(moyal_mul(ak, b)).truncated(6);
            WeylForm rhs = moyal_mul(op_delta(ak), b) + Rational(k % 2 ? -1 : 1) * moyal_mul(ak, op_delta(b));
            CHECK(lhs == rhs.truncated(6));
            CHECK(op_delta(a) == commutator_over_h(gen, a).truncated(6));
        }
    }
}

TEST_CASE("filtration and W+ admissibility") {
    auto c = Chart::standard(1, 8);
    Sampler rs(50);
    for (int s = 0; s < 20; ++s) {
        WeylForm a = rs.form(c, 8, 4, 2, 1, true), b = rs.form(c, 8, 4, 2, 1, true);
        WeylForm p = moyal_mul(a, b);
        if (!p.is_zero())
            CHECK(p.degrees().total_degree_min >= a.degrees().total_degree_min + b.degrees().total_degree_min);
        for (const WeylForm& r : {p, graded_commutator(a, b), op_delta(a), op_delta_inv(a), exterior_d(a)})
            for (const auto& t : r.terms()) CHECK(t.first.total_degree() >= 0);
    }
    CHECK_THROWS_AS(W("y1*h^-1", c), ParseError);
    CHECK_THROWS_AS(over_h(WeylForm::y(c, 0)), InvalidInput);
}

TEST_CASE("direct graded commutator agrees with the two-product route") {
    for (int n : {1, 2}) {
        auto c = Chart::standard(n, 6);
        Sampler rs(60 + static_cast<std::uint64_t>(n));
        for (int s = 0; s < 20; ++s) {
            WeylForm a = rs.form(c, 6, 4, 3, 2, true), b = rs.form(c, 6, 4, 3, 2, true);
            CHECK(graded_commutator(a, b) == graded_commutator_by_products(a, b, 6));
        }
    }
}

TEST_CASE("mixing charts is rejected") {
    auto c6 = Chart::standard(1, 6);
    RationalMatrix w(2);
    w(0, 1) = 2;
    w(1, 0) = -2;
    auto other = Chart::make(w, 6);
    CHECK_THROWS_AS(moyal_mul(WeylForm::y(c6, 0), WeylForm::y(other, 0)), ContextMismatch);
}

TEST_CASE("nonstandard omega: y1 o y2 scales with omega^12") {
    RationalMatrix w(2);
    w(0, 1) = 2;
    w(1, 0) = -2;
    auto c = Chart::make(w, 6);
    // omega^12 = -1/2, so the Moyal term is (-h/2) * (-1/2) = h/4.
    CHECK(moyal_mul(WeylForm::y(c, 0), WeylForm::y(c, 1)) == parse_weyl("y1*y2 + 1/4*h", c));
}
