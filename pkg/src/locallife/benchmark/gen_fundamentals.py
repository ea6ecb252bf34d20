"""Question generators for the service-fundamentals tasks.

Every generator derives the correct answer from ground data (record fields,
parsed attribute pairs, brute-force co-occurrence counts) and draws wrong
options from pools that are verifiably wrong for that question.  Generators
emit drafts with the correct option first; the assembler shuffles.
"""

from __future__ import annotations

from statistics import mean

from ..platform_data import MerchantRecord
from ..rng import SplitMix64, derive_seed
from .distractors import sample_distractors
from .questions import NO, YES, GenContext
from .textconv import leading_int, normalize_value, value_tokens

Draft = dict


def _draft(stem: str, correct: str, distractors: list[str], source_ids: list[str],
           evidence: dict | None = None) -> Draft:
    return {
        "stem": stem,
        "correct": correct,
        "distractors": distractors,
        "source_ids": source_ids,
        "evidence": evidence or {},
    }


def _binary(stem: str, is_yes: bool, source_ids: list[str], evidence: dict | None = None) -> Draft:
    return _draft(stem, YES if is_yes else NO, [NO if is_yes else YES], source_ids, evidence)


def _task_rng(seed: int, task_id: str) -> SplitMix64:
    return SplitMix64(derive_seed(seed, "task", task_id))


def _shortfall(drafts: list, n: int, notes: list[str], reason: str) -> None:
    if len(drafts) < n:
        notes.append(f"built {len(drafts)} of {n}: {reason}")


def gen_category_prediction(ctx: GenContext, qc, n: int, seed: int):
    rng = _task_rng(seed, "category_prediction")
    drafts: list[Draft] = []
    notes: list[str] = []
    for merchant in ctx.merchants:
        if len(drafts) >= n:
            break
        correct = merchant.leaf_category()
        pool = [leaf for leaf in ctx.leaves if leaf != correct]
        if len(pool) < 3:
            continue
        stem = (
            f"A merchant is named '{merchant.name}'. Its listing reads: "
            f"\"{merchant.introduction}\". Which category does this merchant belong to?"
        )
        drafts.append(_draft(stem, correct, sample_distractors(correct, pool, 3, rng.next_u64()),
                             [merchant.merchant_id]))
    _shortfall(drafts, n, notes, "not enough merchants with distinct categories")
    return drafts, notes


def gen_attribute_mining(ctx: GenContext, qc, n: int, seed: int):
    rng = _task_rng(seed, "attribute_mining")
    drafts: list[Draft] = []
    notes: list[str] = []
    for merchant in ctx.merchants:
        if len(drafts) >= n:
            break
        attrs = ctx.attrs[merchant.merchant_id]
        absent = [k for k in ctx.all_attr_keys if k not in attrs]
        if not attrs or len(absent) < 3:
            continue
        keys = sorted(attrs)
        correct = keys[rng.randbelow(len(keys))]
        stem = (
            f"Merchant '{merchant.name}' describes itself as: \"{merchant.introduction}\". "
            f"Which of these attributes applies to this merchant?"
        )
        drafts.append(_draft(stem, correct, sample_distractors(correct, absent, 3, rng.next_u64()),
                             [merchant.merchant_id]))
    _shortfall(drafts, n, notes, "merchants lack parseable attributes or absent-key pool")
    return drafts, notes


def gen_attribute_value_extraction(ctx: GenContext, qc, n: int, seed: int):
    rng = _task_rng(seed, "attribute_value_extraction")
    values_by_key: dict[str, list[str]] = {}
    for attrs in ctx.attrs.values():
        for key, value in attrs.items():
            values_by_key.setdefault(key, []).append(value)
    drafts: list[Draft] = []
    notes: list[str] = []
    for index, merchant in enumerate(ctx.merchants):
        if len(drafts) >= n:
            break
        attrs = ctx.attrs[merchant.merchant_id]
        if not attrs:
            continue
        keys = sorted(attrs)
        key = keys[index % len(keys)]
        correct = attrs[key]
        pool = sorted({v for v in values_by_key.get(key, []) if v != correct})
        if len(pool) < 3:
            continue
        stem = (
            f"Merchant description: \"{merchant.introduction}\". "
            f"What is the value of the attribute '{key}' for this merchant?"
        )
        drafts.append(_draft(stem, correct, sample_distractors(correct, pool, 3, rng.next_u64()),
                             [merchant.merchant_id], {"key": key}))
    _shortfall(drafts, n, notes, "too few distinct values per attribute key")
    return drafts, notes


def gen_multilevel_category_prediction(ctx: GenContext, qc, n: int, seed: int):
    rng = _task_rng(seed, "multilevel_category_prediction")
    all_paths = sorted({" > ".join(m.category_path) for m in ctx.merchants})
    drafts: list[Draft] = []
    notes: list[str] = []
    for merchant in ctx.merchants:
        if len(drafts) >= n:
            break
        correct = " > ".join(merchant.category_path)
        pool = [p for p in all_paths if p != correct]
        if len(pool) < 3:
            continue
        stem = (
            f"Merchant name: '{merchant.name}'. Which complete category path, from the top "
            f"level down to the finest granularity, fits this merchant?"
        )
        drafts.append(_draft(stem, correct, sample_distractors(correct, pool, 3, rng.next_u64()),
                             [merchant.merchant_id]))
    _shortfall(drafts, n, notes, "too few distinct category paths")
    return drafts, notes


def gen_category_merchant_selection(ctx: GenContext, qc, n: int, seed: int):
    rng = _task_rng(seed, "category_merchant_selection")
    drafts: list[Draft] = []
    notes: list[str] = []
    index = 0
    while len(drafts) < n and index < n * 3:
        leaf = ctx.leaves[index % len(ctx.leaves)]
        index += 1
        inside = ctx.merchants_by_leaf.get(leaf, [])
        outside = [m for m in ctx.merchants if m.leaf_category() != leaf]
        if not inside or len(outside) < 3:
            continue
        correct_m = inside[rng.randbelow(len(inside))]
        distractor_names = sample_distractors(correct_m.name, [m.name for m in outside], 3,
                                              rng.next_u64())
        name_to_id = {m.name: m.merchant_id for m in ctx.merchants}
        stem = f"Which of these merchants most likely belongs to the category '{leaf}'?"
        drafts.append(_draft(stem, correct_m.name, distractor_names, [correct_m.merchant_id],
                             {"leaf": leaf,
                              "option_merchant_ids": [name_to_id[x] for x in
                                                      [correct_m.name, *distractor_names]]}))
    _shortfall(drafts, n, notes, "categories lack in/out merchant pools")
    return drafts, notes


def gen_attribute_category_selection(ctx: GenContext, qc, n: int, seed: int):
    rng = _task_rng(seed, "attribute_category_selection")
    cats_with_key: dict[str, set[str]] = {}
    for merchant in ctx.merchants:
        for key in ctx.attrs[merchant.merchant_id]:
            cats_with_key.setdefault(key, set()).add(merchant.leaf_category())
    drafts: list[Draft] = []
    notes: list[str] = []
    index = 0
    usable = [k for k in ctx.all_attr_keys if cats_with_key.get(k)]
    while len(drafts) < n and index < n * 3 and usable:
        key = usable[index % len(usable)]
        index += 1
        with_key = sorted(cats_with_key[key])
        without_key = [leaf for leaf in ctx.leaves if leaf not in cats_with_key[key]]
        if len(without_key) < 3:
            continue
        correct = with_key[rng.randbelow(len(with_key))]
        stem = f"To which category of merchants can the attribute '{key}' apply?"
        drafts.append(_draft(stem, correct, sample_distractors(correct, without_key, 3, rng.next_u64()),
                             [], {"key": key}))
    _shortfall(drafts, n, notes, "attribute keys apply to almost every category")
    return drafts, notes


def gen_same_category_judgment(ctx: GenContext, qc, n: int, seed: int):
    rng = _task_rng(seed, "same_category_judgment")
    multi_leaf = [leaf for leaf, ms in ctx.merchants_by_leaf.items() if len(ms) >= 2]
    drafts: list[Draft] = []
    notes: list[str] = []
    for index in range(n * 2):
        if len(drafts) >= n:
            break
        if index % 2 == 0 and multi_leaf:
            leaf = sorted(multi_leaf)[rng.randbelow(len(multi_leaf))]
            group = ctx.merchants_by_leaf[leaf]
            a = group[rng.randbelow(len(group))]
            b = group[rng.randbelow(len(group))]
            if a.merchant_id == b.merchant_id:
                b = group[(group.index(a) + 1) % len(group)]
            same = True
        else:
            a = ctx.merchants[rng.randbelow(len(ctx.merchants))]
            others = [m for m in ctx.merchants if m.leaf_category() != a.leaf_category()]
            if not others:
                continue
            b = others[rng.randbelow(len(others))]
            same = False
        stem = f"Do the merchants '{a.name}' and '{b.name}' belong to the same category?"
        drafts.append(_binary(stem, same, [a.merchant_id, b.merchant_id]))
    _shortfall(drafts, n, notes, "not enough merchant pairs")
    return drafts, notes


def gen_same_category_selection(ctx: GenContext, qc, n: int, seed: int):
    rng = _task_rng(seed, "same_category_selection")
    name_to_id = {m.name: m.merchant_id for m in ctx.merchants}
    drafts: list[Draft] = []
    notes: list[str] = []
    for merchant in ctx.merchants:
        if len(drafts) >= n:
            break
        peers = [m for m in ctx.merchants_by_leaf[merchant.leaf_category()]
                 if m.merchant_id != merchant.merchant_id]
        outside = [m for m in ctx.merchants if m.leaf_category() != merchant.leaf_category()]
        if not peers or len(outside) < 3:
            continue
        correct = peers[rng.randbelow(len(peers))].name
        distractors = sample_distractors(correct, [m.name for m in outside], 3, rng.next_u64())
        stem = f"Which of these merchants is in the same category as '{merchant.name}'?"
        drafts.append(_draft(stem, correct, distractors, [merchant.merchant_id],
                             {"option_merchant_ids": [name_to_id[x] for x in [correct, *distractors]]}))
    _shortfall(drafts, n, notes, "categories lack peers")
    return drafts, notes


def gen_attribute_value_reasonableness(ctx: GenContext, qc, n: int, seed: int):
    rng = _task_rng(seed, "attribute_value_reasonableness")
    drafts: list[Draft] = []
    notes: list[str] = []
    for index, merchant in enumerate(ctx.merchants):
        if len(drafts) >= n:
            break
        attrs = ctx.attrs[merchant.merchant_id]
        if not attrs:
            continue
        keys = sorted(attrs)
        key = keys[index % len(keys)]
        truthful = index % 2 == 0
        if truthful:
            value = attrs[key]
        else:
            foreign = sorted({
                other[key] for other in ctx.attrs.values()
                if key in other and other[key] != attrs[key]
            })
            if not foreign:
                continue
            value = foreign[rng.randbelow(len(foreign))]
        stem = (
            f"Merchant description: \"{merchant.introduction}\". For the attribute '{key}', "
            f"is '{value}' the correct value for this merchant?"
        )
        drafts.append(_binary(stem, truthful, [merchant.merchant_id], {"key": key, "value": value}))
    _shortfall(drafts, n, notes, "attribute values lack foreign alternatives")
    return drafts, notes


def gen_attribute_value_identification(ctx: GenContext, qc, n: int, seed: int):
    rng = _task_rng(seed, "attribute_value_identification")
    drafts: list[Draft] = []
    notes: list[str] = []
    for index, merchant in enumerate(ctx.merchants):
        if len(drafts) >= n:
            break
        attrs = ctx.attrs[merchant.merchant_id]
        absent = [k for k in ctx.all_attr_keys if k not in attrs]
        if not attrs or len(absent) + len(attrs) - 1 < 3:
            continue
        keys = sorted(attrs)
        key = keys[index % len(keys)]
        value = attrs[key]
        # The value must identify its key unambiguously within this merchant.
        if sum(1 for k, v in attrs.items() if v == value) != 1:
            continue
        pool = [k for k in ctx.all_attr_keys if k != key]
        stem = (
            f"Merchant description: \"{merchant.introduction}\". The value '{value}' "
            f"describes which attribute of this merchant?"
        )
        drafts.append(_draft(stem, key, sample_distractors(key, pool, 3, rng.next_u64()),
                             [merchant.merchant_id], {"value": value}))
    _shortfall(drafts, n, notes, "attribute keys too few")
    return drafts, notes


def gen_attribute_value_synonym(ctx: GenContext, qc, n: int, seed: int):
    rng = _task_rng(seed, "attribute_value_synonym")
    values = sorted({v for attrs in ctx.attrs.values() for v in attrs.values()})
    drafts: list[Draft] = []
    notes: list[str] = []
    for index in range(n * 2):
        if len(drafts) >= n or not values:
            break
        base = values[rng.randbelow(len(values))]
        if index % 2 == 0:
            variant = base.upper() if base.upper() != base else base.title()
            if variant == base:
                continue
            a, b = base, variant
        else:
            others = [v for v in values if normalize_value(v) != normalize_value(base)]
            if not others:
                continue
            a, b = base, others[rng.randbelow(len(others))]
        same = normalize_value(a) == normalize_value(b)
        stem = f"Do the attribute values '{a}' and '{b}' express the same meaning?"
        drafts.append(_binary(stem, same, [], {"a": a, "b": b}))
    _shortfall(drafts, n, notes, "value pool too small")
    return drafts, notes


def gen_attribute_value_containment(ctx: GenContext, qc, n: int, seed: int):
    rng = _task_rng(seed, "attribute_value_containment")
    values = sorted({v for attrs in ctx.attrs.values() for v in attrs.values()})
    multiword = [v for v in values if len(value_tokens(v)) >= 2]
    drafts: list[Draft] = []
    notes: list[str] = []
    for index in range(n * 2):
        if len(drafts) >= n:
            break
        if index % 2 == 0 and multiword:
            whole = multiword[rng.randbelow(len(multiword))]
            tokens = normalize_value(whole).split()
            part = tokens[-1]
            a, b = whole, part
        else:
            if len(values) < 2:
                continue
            a = values[rng.randbelow(len(values))]
            disjoint = [v for v in values if not (value_tokens(v) & value_tokens(a))]
            if not disjoint:
                continue
            b = disjoint[rng.randbelow(len(disjoint))]
        ta, tb = value_tokens(a), value_tokens(b)
        contained = (ta < tb) or (tb < ta)
        stem = (
            f"Consider the attribute values '{a}' and '{b}'. Does a containment "
            f"relationship exist between them (one contained in the other)?"
        )
        drafts.append(_binary(stem, contained, [], {"a": a, "b": b}))
    _shortfall(drafts, n, notes, "no multi-word values for containment")
    return drafts, notes


def gen_attribute_compatibility(ctx: GenContext, qc, n: int, seed: int):
    rng = _task_rng(seed, "attribute_compatibility")

    def cooccurs(k1: str, v1: str, k2: str, v2: str) -> bool:
        return any(
            attrs.get(k1) == v1 and attrs.get(k2) == v2 for attrs in ctx.attrs.values()
        )

    drafts: list[Draft] = []
    notes: list[str] = []
    merchant_ids = [m.merchant_id for m in ctx.merchants]
    for index in range(n * 3):
        if len(drafts) >= n:
            break
        mid = merchant_ids[rng.randbelow(len(merchant_ids))]
        attrs = ctx.attrs[mid]
        keys = sorted(attrs)
        if len(keys) < 2:
            continue
        k1, k2 = keys[rng.randbelow(len(keys))], keys[rng.randbelow(len(keys))]
        if k1 == k2:
            k2 = keys[(keys.index(k1) + 1) % len(keys)]
        if index % 2 == 0:
            v1, v2 = attrs[k1], attrs[k2]
        else:
            other = ctx.attrs[merchant_ids[rng.randbelow(len(merchant_ids))]]
            if k2 not in other:
                continue
            v1, v2 = attrs[k1], other[k2]
        compatible = cooccurs(k1, v1, k2, v2)
        stem = (
            f"Can the attributes '{k1}: {v1}' and '{k2}: {v2}' describe the same merchant?"
        )
        drafts.append(_binary(stem, compatible, [], {"k1": k1, "v1": v1, "k2": k2, "v2": v2}))
    _shortfall(drafts, n, notes, "not enough attribute pairs")
    return drafts, notes


def _near_numbers(correct: int, count: int) -> list[str]:
    offsets = (10, -10, 25, -25, 5, -5, 40, 3, 7, 60)
    values: list[int] = []
    for offset in offsets:
        candidate = correct + offset
        if candidate > 0 and candidate != correct and candidate not in values:
            values.append(candidate)
        if len(values) == count:
            break
    bump = 1
    while len(values) < count:
        candidate = correct + 100 + bump
        if candidate not in values:
            values.append(candidate)
        bump += 1
    return [str(v) for v in values]


def gen_mathematical_operations(ctx: GenContext, qc, n: int, seed: int):
    rng = _task_rng(seed, "mathematical_operations")
    priced = [
        (m, leading_int(ctx.attrs[m.merchant_id]["price"]))
        for m in ctx.merchants
        if "price" in ctx.attrs[m.merchant_id]
        and leading_int(ctx.attrs[m.merchant_id]["price"]) is not None
    ]
    drafts: list[Draft] = []
    notes: list[str] = []
    for index in range(n * 2):
        if len(drafts) >= n or len(priced) < 2:
            break
        a, pa = priced[index % len(priced)]
        b, pb = priced[(index + 1 + rng.randbelow(len(priced) - 1)) % len(priced)]
        if a.merchant_id == b.merchant_id:
            continue
        op = ("sum", "difference", "multiple")[index % 3]
        if op == "sum":
            stem = (
                f"Merchant '{a.name}' charges {pa} yuan per person and merchant '{b.name}' "
                f"charges {pb} yuan per person. One person visits both; what is the total cost in yuan?"
            )
            correct = pa + pb
            evidence = {"op": "sum", "merchant_ids": [a.merchant_id, b.merchant_id]}
        elif op == "difference":
            if pa == pb:
                continue
            stem = (
                f"Merchant '{a.name}' charges {pa} yuan per person and merchant '{b.name}' "
                f"charges {pb} yuan per person. How much more expensive is the pricier one, in yuan?"
            )
            correct = abs(pa - pb)
            evidence = {"op": "difference", "merchant_ids": [a.merchant_id, b.merchant_id]}
        else:
            k = 2 + rng.randbelow(4)
            stem = (
                f"A group of {k} people each pays the per-person price at '{a.name}', "
                f"which charges {pa} yuan per person. What is the total cost in yuan?"
            )
            correct = pa * k
            evidence = {"op": "multiple", "merchant_ids": [a.merchant_id], "k": k}
        drafts.append(_draft(stem, str(correct), _near_numbers(correct, 3),
                             evidence["merchant_ids"], evidence))
    _shortfall(drafts, n, notes, "not enough priced merchants")
    return drafts, notes


def _intro_without_key(merchant: MerchantRecord, key: str) -> str:
    parts = [p for p in merchant.introduction.split("; ") if not p.startswith(f"{key}:")]
    return "; ".join(parts)


def gen_function_tag_prediction(ctx: GenContext, qc, n: int, seed: int):
    rng = _task_rng(seed, "function_tag_prediction")
    functions = sorted({
        attrs["function"] for attrs in ctx.attrs.values() if "function" in attrs
    })
    drafts: list[Draft] = []
    notes: list[str] = []
    for merchant in ctx.merchants:
        if len(drafts) >= n:
            break
        attrs = ctx.attrs[merchant.merchant_id]
        if "function" not in attrs:
            continue
        correct = attrs["function"]
        pool = [f for f in functions if f != correct]
        if len(pool) < 3:
            continue
        stem = (
            f"Merchant description: \"{_intro_without_key(merchant, 'function')}\". "
            f"Which function tag best describes what this merchant is suitable for?"
        )
        drafts.append(_draft(stem, correct, sample_distractors(correct, pool, 3, rng.next_u64()),
                             [merchant.merchant_id]))
    _shortfall(drafts, n, notes, "too few distinct function tags")
    return drafts, notes


def _brand_mean_price(ctx: GenContext, brand: str) -> float | None:
    prices = [
        leading_int(ctx.attrs[m.merchant_id]["price"])
        for m in ctx.brand_merchants.get(brand, [])
        if "price" in ctx.attrs[m.merchant_id]
    ]
    prices = [p for p in prices if p is not None]
    return mean(prices) if prices else None


def gen_brand_positioning(ctx: GenContext, qc, n: int, seed: int):
    pairs: list[tuple[str, str]] = []
    brands_by_leaf: dict[str, list[str]] = {}
    for brand, merchants in sorted(ctx.brand_merchants.items()):
        for merchant in merchants:
            leaf = merchant.leaf_category()
            if brand not in brands_by_leaf.setdefault(leaf, []):
                brands_by_leaf[leaf].append(brand)
    for leaf in sorted(brands_by_leaf):
        brands = sorted(brands_by_leaf[leaf])
        for i, b1 in enumerate(brands):
            for b2 in brands[i + 1 :]:
                pairs.append((b1, b2))
    drafts: list[Draft] = []
    notes: list[str] = []
    for index, (b1, b2) in enumerate(pairs * 2):
        if len(drafts) >= n:
            break
        p1, p2 = _brand_mean_price(ctx, b1), _brand_mean_price(ctx, b2)
        if p1 is None or p2 is None or abs(p1 - p2) < 1.0:
            continue
        higher = b1 if p1 > p2 else b2
        subject = higher if index % 2 == 0 else (b2 if higher == b1 else b1)
        other = b2 if subject == b1 else b1
        stem = (
            f"Consider the two brands '{subject}' and '{other}'. "
            f"Is '{subject}' positioned as the more premium of the two?"
        )
        drafts.append(_binary(stem, subject == higher, [], {"brands": [subject, other]}))
    _shortfall(drafts, n, notes, "not enough same-category brand pairs with price data")
    return drafts, notes


def gen_brand_similarity(ctx: GenContext, qc, n: int, seed: int):
    rng = _task_rng(seed, "brand_similarity")
    brand_cats = {
        brand: {m.leaf_category() for m in merchants}
        for brand, merchants in ctx.brand_merchants.items()
    }
    brands = sorted(brand_cats)
    drafts: list[Draft] = []
    notes: list[str] = []
    for brand in brands:
        if len(drafts) >= n:
            break
        overlaps = {
            other: len(brand_cats[brand] & brand_cats[other])
            for other in brands
            if other != brand
        }
        best = max(overlaps.values(), default=0)
        winners = [b for b, olap in overlaps.items() if olap == best]
        if best == 0 or len(winners) != 1:
            continue
        zero = [b for b, olap in overlaps.items() if olap == 0]
        if len(zero) < 3:
            continue
        correct = winners[0]
        stem = f"Which of these brands is the most similar to '{brand}'?"
        drafts.append(_draft(stem, correct, sample_distractors(correct, zero, 3, rng.next_u64()),
                             [], {"brand": brand}))
    _shortfall(drafts, n, notes, "brand category overlaps not unique")
    return drafts, notes


def gen_category_complementarity(ctx: GenContext, qc, n: int, seed: int):
    rng = _task_rng(seed, "category_complementarity")
    co: dict[str, dict[str, int]] = {}
    for counts in ctx.user_leaf_counts.values():
        present = sorted(leaf for leaf, c in counts.items() if c > 0)
        for i, l1 in enumerate(present):
            for l2 in present[i + 1 :]:
                co.setdefault(l1, {})[l2] = co.setdefault(l1, {}).get(l2, 0) + 1
                co.setdefault(l2, {})[l1] = co.setdefault(l2, {}).get(l1, 0) + 1
    drafts: list[Draft] = []
    notes: list[str] = []
    for leaf in ctx.leaves:
        if len(drafts) >= n:
            break
        partners = co.get(leaf, {})
        if not partners:
            continue
        best_count = max(partners.values())
        winners = [l for l, c in partners.items() if c == best_count]
        if len(winners) != 1 or best_count < 2:
            continue
        correct = winners[0]
        weak = [
            l for l in ctx.leaves
            if l != leaf and l != correct and partners.get(l, 0) * 2 <= best_count
        ]
        if len(weak) < 3:
            continue
        stem = (
            f"Users who consume '{leaf}' services also often consume services from which "
            f"complementary category?"
        )
        drafts.append(_draft(stem, correct, sample_distractors(correct, weak, 3, rng.next_u64()),
                             [], {"leaf": leaf, "co_count": best_count}))
    _shortfall(drafts, n, notes, "co-consumption counts lack a unique maximum")
    return drafts, notes
