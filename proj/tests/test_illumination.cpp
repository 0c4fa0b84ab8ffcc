#include <catch_amalgamated.hpp>

#include <cmath>

#include "mfhelm/illumination.hpp"

using namespace mfhelm;

TEST_CASE("basic expressions evaluate correctly")
{
    CHECK(Illumination::parse("x1+2").eval(0.5, 0.0) == Catch::Approx(2.5));
    CHECK(Illumination::parse("1").eval(-3.0, 7.0) == 1.0);
    CHECK(Illumination::parse("x2+2").eval(0.0, -1.0) == Catch::Approx(1.0));
    CHECK(Illumination::parse("x1*x2 - 3").eval(2.0, 4.0) == Catch::Approx(5.0));
    CHECK(Illumination::parse("sin(x1)*cos(x2)").eval(0.3, 0.7) ==
          Catch::Approx(std::sin(0.3) * std::cos(0.7)));
    CHECK(Illumination::parse("-x1").eval(2.0, 0.0) == Catch::Approx(-2.0));
    CHECK(Illumination::parse("2*(x1+x2)").eval(1.0, 2.0) == Catch::Approx(6.0));
    CHECK(Illumination::parse("1-2-3").eval(0, 0) == Catch::Approx(-4.0));  // left associative
    CHECK(Illumination::parse("-x1*2").eval(3.0, 0.0) == Catch::Approx(-6.0));
}

TEST_CASE("syntax errors carry the byte offset")
{
    CHECK_THROWS_WITH(Illumination::parse("x1+*2"), Catch::Matchers::ContainsSubstring("offset 3"));
    CHECK_THROWS_AS(Illumination::parse(""), validation_error);
    CHECK_THROWS_AS(Illumination::parse("x1+"), validation_error);
    CHECK_THROWS_AS(Illumination::parse("(x1"), validation_error);
    CHECK_THROWS_AS(Illumination::parse("sin x1"), validation_error);
    CHECK_THROWS_WITH(Illumination::parse("x3+1"),
                      Catch::Matchers::ContainsSubstring("unknown identifier"));
    CHECK_THROWS_AS(Illumination::parse("x1 x2"), validation_error);
}

TEST_CASE("printer round-trips through the parser")
{
    for (const char* src :
         {"x1+2", "x2+2", "1", "x1", "-x1*2", "2*(x1+x2)", "sin(x1*3)-cos(x2)",
          "x1-(x2-1)", "-(x1+x2)", "1-2-3", "0.5*x1*x2", "-(x1*x2)"}) {
        Illumination a = Illumination::parse(src);
        Illumination b = Illumination::parse(a.print());
        INFO("source: " << src << " printed: " << a.print());
        CHECK(a.same_tree(b));
        // and the reprint is a fixed point
        CHECK(b.print() == a.print());
    }
}

TEST_CASE("gradient evaluation matches hand derivatives")
{
    auto g = Illumination::parse("x1*x1 + 3*x2").eval_grad(2.0, 1.0);
    CHECK(g.value == Catch::Approx(7.0));
    CHECK(g.dx1 == Catch::Approx(4.0));
    CHECK(g.dx2 == Catch::Approx(3.0));

    auto s = Illumination::parse("sin(x1*x2)").eval_grad(0.5, 0.25);
    CHECK(s.dx1 == Catch::Approx(0.25 * std::cos(0.125)));
    CHECK(s.dx2 == Catch::Approx(0.5 * std::cos(0.125)));

    // finite-difference cross check
    Illumination f = Illumination::parse("cos(x1)-x2*x1");
    double h = 1e-6;
    auto grad = f.eval_grad(0.7, -0.4);
    double fd1 = (f.eval(0.7 + h, -0.4) - f.eval(0.7 - h, -0.4)) / (2 * h);
    double fd2 = (f.eval(0.7, -0.4 + h) - f.eval(0.7, -0.4 - h)) / (2 * h);
    CHECK(grad.dx1 == Catch::Approx(fd1).margin(1e-8));
    CHECK(grad.dx2 == Catch::Approx(fd2).margin(1e-8));
}
