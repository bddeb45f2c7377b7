#include <doctest.h>

#include "wakeup/fft.hpp"
#include "wakeup/ofdm_link.hpp"

using namespace wakeup;

TEST_SUITE("ofdm_link")
{
    TEST_CASE("default layout puts pdwch on bins 1..117 with guards above")
    {
        const PdwchLayout lay = plan_layout(PdwchGroupConfig{}, OfdmParams{});
        REQUIRE(lay.pdwch_bins.size() == 117);
        CHECK(lay.pdwch_bins.front() == 1);
        CHECK(lay.pdwch_bins.back() == 117);
        CHECK(lay.guards_high == 10);
        CHECK(lay.guards_low == 0);
        CHECK(lay.guard_bins.front() == 118);
        CHECK(lay.guard_bins.back() == 127);
        CHECK_FALSE(lay.fits_both_sides());
        CHECK(std::find(lay.guard_bins.begin(), lay.guard_bins.end(), 0) == lay.guard_bins.end());
    }

    TEST_CASE("layout fails only when pdwch and dc do not fit")
    {
        PdwchGroupConfig g;
        g.K = 129;
        g.root = 31;
        g.M = 7;
        CHECK_THROWS_AS(plan_layout(g, OfdmParams{}), InvalidParameters);
        OfdmParams big;
        big.N = 256;
        PdwchGroupConfig centred;
        centred.freq_offset = -127;
        const PdwchLayout lay = plan_layout(centred, big);
        CHECK(lay.fits_both_sides());
        CHECK(lay.bin(0) == 129);
        CHECK(lay.guards_low == 10);
        CHECK(lay.guards_high == 10);
    }

    TEST_CASE("symbol offsets")
    {
        OfdmParams p;
        CHECK(p.symbol_offset(1) == 0);
        CHECK(p.symbol_offset(2) == 137);
        CHECK(p.symbol_offset(4) == 3 * 137);
        CHECK(p.sample_rate() == doctest::Approx(1.92e6));
        p.first_cp = 10;
        CHECK(p.cp_length(1) == 10);
        CHECK(p.symbol_offset(2) == 138);
    }

    TEST_CASE("modulated pdwch symbol carries the spectrum on its bins")
    {
        const PdwchGroupConfig g;
        const OfdmParams p;
        const PdwchLayout lay = plan_layout(g, p);
        const CVec Y = build_pdwch_spectrum(g, WakeIndicators{1, 0, 0, 1, 0, 0, 0});
        ImpairmentSpec spec;
        spec.delta = 21;
        spec.pdwch_symbol_index = 2;
        Rng rng = make_rng(5);
        const Frame fr = modulate_frame(Y, lay, p, spec, 3, rng);
        CHECK(fr.samples.size() == 21 + 4 * 137);
        CHECK(fr.samples.head(21).norm() == 0.0);

        const int start = 21 + p.symbol_offset(2);
        const CVec body = fr.samples.segment(start + p.N_cp, p.N);
        CHECK((fr.samples.segment(start, p.N_cp) - body.tail(p.N_cp)).norm() < 1e-12);
        const CVec bins = fft<double>(body);
        for (int k = 0; k < g.K; ++k)
            CHECK(std::abs(bins[lay.bin(k)] - Y[k]) < 1e-9);
        for (int gb : lay.guard_bins)
            CHECK(std::abs(bins[gb]) < 1e-9);
        CHECK(std::abs(bins[0]) < 1e-9);

        // filler symbols: every bin but DC carries unit QPSK
        const CVec other = fft<double>(fr.samples.segment(21 + p.N_cp, p.N));
        CHECK(std::abs(other[0]) < 1e-9);
        CHECK(std::abs(std::abs(other[5]) - 1.0) < 1e-9);
    }

    TEST_CASE("noise variance per bin")
    {
        CHECK(noise_variance(0.0) == doctest::Approx(1.0));
        CHECK(noise_variance(10.0) == doctest::Approx(0.1));
        CHECK(noise_variance(-3.0) == doctest::Approx(1.9952623149688795));
    }

    TEST_CASE("cfo rotation without noise")
    {
        const OfdmParams p;
        CVec x = CVec::Ones(300);
        ImpairmentSpec spec;
        spec.eps_i = 1;
        spec.eps_f = 0.25;
        Rng rng = make_rng(1);
        const CVec y = apply_impairments(x, spec, p, rng);
        for (int n : {0, 1, 77, 299})
            CHECK(std::abs(y[n] - std::polar(1.0, 2 * kPi * 1.25 * n / 128.0)) < 1e-9);
    }

    TEST_CASE("impairment ranges")
    {
        ImpairmentSpec s;
        s.eps_f = 0.5;
        CHECK_THROWS_AS(s.validate(5), InvalidParameters);
        s.eps_f = -0.5;
        CHECK_NOTHROW(s.validate(5));
        s.eps_i = 3;
        CHECK_THROWS_AS(s.validate(5), InvalidParameters);
    }

    TEST_CASE("flat channel is a complex scalar")
    {
        Rng rng = make_rng(3);
        CVec x(50);
        for (int i = 0; i < 50; ++i)
            x[i] = complex_normal(rng);
        const CVec y = apply_channel(x, FadingChannel::flat(), OfdmParams{}, rng);
        const cplx h = y[0] / x[0];
        CHECK((y - h * x).norm() < 1e-9);
        CHECK((apply_channel(x, FadingChannel::none(), OfdmParams{}, rng) - x).norm() == 0.0);
    }

    TEST_CASE("epa taps collapse onto two sample offsets")
    {
        const auto taps = quantize_taps(FadingChannel::epa(), 1.92e6);
        REQUIRE(taps.size() == 2);
        CHECK(taps[0].offset == 0);
        CHECK(taps[1].offset == 1);
        CHECK(taps[0].power + taps[1].power == doctest::Approx(1.0));
    }

    TEST_CASE("epa keeps average power")
    {
        Rng rng = make_rng(11);
        CVec x = CVec::Zero(64);
        x[10] = 1.0;
        double total = 0;
        const int n = 10000;
        for (int i = 0; i < n; ++i)
            total += apply_channel(x, FadingChannel::epa(), OfdmParams{}, rng).squaredNorm();
        CHECK(total / n == doctest::Approx(1.0).epsilon(0.03));
    }

    TEST_CASE("doppler channel keeps average power")
    {
        FadingChannel ch = FadingChannel::epa();
        ch.doppler = 70.0;
        Rng rng = make_rng(12);
        const CVec x = CVec::Ones(256);
        double total = 0;
        const int n = 4000;
        for (int i = 0; i < n; ++i)
            total += apply_channel(x, ch, OfdmParams{}, rng).squaredNorm() / 256.0;
        CHECK(total / n == doctest::Approx(1.0).epsilon(0.05));
    }
}
