#include <doctest.h>

#include <algorithm>
#include <set>

#include "wmforge/error.hpp"
#include "wmforge/greenlist.hpp"

using namespace wmforge;

TEST_SUITE("greenlist") {
  TEST_CASE("half split of ten tokens") {
    const auto key = SecretKey::derive(1, "g");
    const std::vector<TokenId> ctx{3};
    const auto p = partition(key, ctx, 1, 0.5, 10);
    CHECK(p.green().size() == 5);
    const auto red = p.red();
    CHECK(red.size() == 5);
    std::set<TokenId> all(p.green().begin(), p.green().end());
    all.insert(red.begin(), red.end());
    CHECK(all.size() == 10);
    CHECK(std::is_sorted(p.green().begin(), p.green().end()));
    for (TokenId t = 0; t < 10; ++t)
      CHECK(p.is_green(t) != std::binary_search(red.begin(), red.end(), t));
    CHECK_THROWS_AS(p.is_green(10), ConfigError);
  }

  TEST_CASE("list sizes") {
    CHECK(green_list_size(0.25, 32000) == 8000);
    CHECK(green_list_size(0.5, 10) == 5);
    CHECK(green_list_size(0.3, 10) == 3);
    CHECK(green_list_size(0.1, 9) == 0);
    const auto p = partition(SecretKey::derive(2, "g"), {}, 1, 0.25, 32000);
    CHECK(p.green().size() == 8000);
    CHECK(p.gamma_used() == doctest::Approx(0.25));
  }

  TEST_CASE("partitions are a function of key and context") {
    const auto key = SecretKey::derive(3, "g");
    const std::vector<TokenId> ctx{5, 9};
    const auto a = partition(key, ctx, 2, 0.25, 500);
    const auto b = partition(key, ctx, 2, 0.25, 500);
    CHECK(a == b);
    CHECK(a.fingerprint() == b.fingerprint());
    CHECK_FALSE(partition(SecretKey::derive(4, "g"), ctx, 2, 0.25, 500) == a);
    const std::vector<TokenId> other{5, 10};
    CHECK_FALSE(partition(key, other, 2, 0.25, 500) == a);
  }

  TEST_CASE("only the last h tokens seed the list") {
    const auto key = SecretKey::derive(5, "g");
    const std::vector<TokenId> long_ctx{1, 2, 3, 4};
    const std::vector<TokenId> tail{3, 4};
    CHECK(partition(key, long_ctx, 2, 0.25, 200) == partition(key, tail, 2, 0.25, 200));
    const std::vector<TokenId> short_ctx{4};
    const std::vector<TokenId> padded{kPadId, 4};
    CHECK(partition(key, short_ctx, 2, 0.25, 200) == partition(key, padded, 2, 0.25, 200));
  }

  TEST_CASE("fixed green lists") {
    const Vocabulary v(std::vector<std::string>{"<unk>", "ikun", "personne2", "the"});
    const std::vector<std::string> ikun{"ikun"};
    const auto g = fixed_green(ikun, v);
    CHECK(std::vector<TokenId>(g.green().begin(), g.green().end()) == std::vector<TokenId>{1});
    const std::vector<std::string> fr{"personne2"};
    CHECK(fixed_green(fr, v).is_green(2));
    CHECK_FALSE(fixed_green(fr, v).is_green(1));
    const std::vector<std::string> missing{"not_in_vocab"};
    CHECK_THROWS_AS(fixed_green(missing, v), ConfigError);
    CHECK_THROWS_AS(fixed_green({}, v), ConfigError);
  }

  TEST_CASE("cache agrees with direct computation") {
    const auto key = SecretKey::derive(6, "g");
    GreenListCache cache(key, 1, 0.25, 300, 4);
    for (TokenId t = 0; t < 20; ++t) {
      const std::vector<TokenId> ctx{t};
      CHECK(cache.get(ctx) == partition(key, ctx, 1, 0.25, 300));
    }
    const std::vector<TokenId> ctx{7, 3};
    const std::vector<TokenId> last{3};
    CHECK(cache.get(ctx) == partition(key, last, 1, 0.25, 300));
  }

  TEST_CASE("bad arguments") {
    const auto key = SecretKey::derive(7, "g");
    CHECK_THROWS_AS(partition(key, {}, 0, 0.25, 10), ConfigError);
    CHECK_THROWS_AS(partition(key, {}, 1, 1.5, 10), ConfigError);
    CHECK_THROWS_AS(partition(key, {}, 1, 0.25, 0), ConfigError);
  }
}
