#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "fixtures.hpp"
#include "paleorecon/errors.hpp"
#include "paleorecon/proxy.hpp"

using namespace paleo;

namespace {

LoadResult parse(const std::string& metadata, const std::string& values, int frozen_at = 1000) {
    std::istringstream m(metadata), v(values);
    return parse_network(m, v, frozen_at);
}

ProxyNetwork fixture_network() {
    const auto dir = fixtures::scratch("proxy_network");
    const auto files = fixtures::write_screening_network(dir);
    return load_network(files.metadata, files.values, 1000).network;
}

bool is_subset(const ProxyNetwork& small, const ProxyNetwork& big) {
    const auto ids = big.ids();
    return std::all_of(small.records.begin(), small.records.end(),
                       [&](const ProxyRecord& r) { return std::find(ids.begin(), ids.end(), r.id) != ids.end(); });
}

}  // namespace

TEST_CASE("load_network on the 95-record fixture") {
    const ProxyNetwork net = fixture_network();
    CHECK(net.size() == 95);
    CHECK(net.frozen_at == 1000);
    CHECK(net.find("P100") != nullptr);
    CHECK(net.find("P194")->resolution == Resolution::decadal);
}

TEST_CASE("load_network rejects records that start after the frozen year") {
    const LoadResult r = parse("id,kind,core_count,flags,resolution\nlate,ice_core,,,annual\n",
                               "year,late\n1199,\n1200,0.5\n1201,0.7\n");
    CHECK(r.network.size() == 0);
    REQUIRE(r.rejections.size() == 1);
    CHECK(r.rejections[0].id == "late");
}

TEST_CASE("load_network format errors") {
    CHECK_THROWS_AS(parse("", "year,a\n1000,1\n"), FormatError);
    try {
        parse("id,kind,core_count,flags,resolution\na,ice_core,,,annual\n", "year,a\n1000,1\n1001,x\n");
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.line() == 3);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    CHECK_THROWS_AS(parse("id,kind,core_count,flags,resolution\na,volcano,,,annual\n", "year,a\n1000,1\n"),
                    FormatError);
    CHECK_THROWS_AS(
        parse("id,kind,core_count,flags,resolution\na,ice_core,,,annual\na,coral,,,annual\n", "year,a\n1000,1\n"),
        DuplicateId);
}

TEST_CASE("screen_replication") {
    const ProxyNetwork net = fixture_network();
    const ProxyNetwork s8 = screen_replication(net, 8);
    CHECK(s8.size() == 59);
    CHECK(screen_replication(net, 1).size() == 95);
    const ProxyNetwork s10 = screen_replication(net, 10);
    CHECK(is_subset(s10, s8));
    CHECK(s10.size() <= s8.size());

    // Order is preserved.
    const auto before = net.ids();
    const auto after = s8.ids();
    std::vector<std::string> filtered;
    std::copy_if(before.begin(), before.end(), std::back_inserter(filtered),
                 [&](const std::string& id) { return std::find(after.begin(), after.end(), id) != after.end(); });
    CHECK(filtered == after);

    CHECK(removed_ids(net, s8).size() == 36);
}

TEST_CASE("screen_replication drops tree rings with unknown core count") {
    const LoadResult r = parse("id,kind,core_count,flags,resolution\nt,tree_ring,,,annual\nc,coral,,,annual\n",
                               "year,t,c\n1000,1,2\n1001,2,3\n");
    const ProxyNetwork s = screen_replication(r.network, 8);
    REQUIRE(s.size() == 1);
    CHECK(s.records[0].id == "c");
}

TEST_CASE("exclude_flagged") {
    const ProxyNetwork net = fixture_network();
    const ProxyNetwork s8 = screen_replication(net, 8);
    const ProxyNetwork s = exclude_flagged(s8, "tiljander");
    CHECK(s.size() == 55);
    CHECK(exclude_flagged(s8, "no_such_flag").ids() == s8.ids());
    CHECK(exclude_flagged(s, "tiljander").ids() == s.ids());

    // Screens commute.
    CHECK(screen_replication(exclude_flagged(net, "tiljander"), 8).ids() == s.ids());
}

TEST_CASE("network_matrix") {
    const ProxyNetwork net = exclude_flagged(screen_replication(fixture_network(), 8), "tiljander");
    const NetworkMatrix m = network_matrix(net, 1000, 2006);
    CHECK(m.rows() == 1007);
    CHECK(m.cols() == 55);
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const TimeSeries& s = net.records[static_cast<std::size_t>(j)].series;
        for (int y = 1000; y <= 2006; ++y) {
            const double v = m.values(m.row_of(y), j);
            if (s.present_at(y)) CHECK(v == s.at_year(y));
            else CHECK(std::isnan(v));
        }
        if (m.resolution[static_cast<std::size_t>(j)] == Resolution::decadal) {
            for (int b = 1000; b + 9 <= 2006; b += 10) {
                int n = 0;
                for (int y = b; y < b + 10; ++y) n += std::isnan(m.values(m.row_of(y), j)) ? 0 : 1;
                CHECK(n <= 1);
            }
        }
    }

    ProxyNetwork single;
    single.records.push_back(net.records.front());
    const NetworkMatrix one = network_matrix(single, 1100, 1200);
    CHECK(one.cols() == 1);
    CHECK(one.column(0) == single.records.front().series.slice({1100, 1200}));
}

TEST_CASE("fill_decadal interpolates and fills the first block") {
    NetworkMatrix m;
    m.first_year = 1000;
    m.values = Eigen::MatrixXd::Constant(25, 2, kMissing);
    m.ids = {"a", "d"};
    m.resolution = {Resolution::annual, Resolution::decadal};
    m.values(3, 0) = 1.0;
    m.values(6, 1) = 1.0;   // 1006
    m.values(16, 1) = 2.0;  // 1016
    const NetworkMatrix f = fill_decadal(m);
    CHECK(std::isnan(f.values(0, 0)));  // annual column untouched
    CHECK(f.values(0, 1) == 1.0);       // 1000 is inside the block ending 1006
    CHECK(f.values(6, 1) == 1.0);
    CHECK(f.values(11, 1) == doctest::Approx(1.5));
    CHECK(f.values(16, 1) == 2.0);
    CHECK(std::isnan(f.values(17, 1)));
}

TEST_CASE("network files round trip") {
    const ProxyNetwork net = fixture_network();
    const auto dir = fixtures::scratch("proxy_roundtrip");
    write_network(net, dir / "m.csv", dir / "v.csv");
    const ProxyNetwork back = load_network(dir / "m.csv", dir / "v.csv", 1000).network;
    REQUIRE(back.size() == net.size());
    for (std::size_t i = 0; i < net.size(); ++i) {
        CHECK(back.records[i].id == net.records[i].id);
        CHECK(back.records[i].core_count == net.records[i].core_count);
        CHECK(back.records[i].flags == net.records[i].flags);
        CHECK(back.records[i].series == net.records[i].series);
    }
}
