#!/usr/bin/env python3
"""Regenerates the committed fixture data under data/.

Everything is deterministic. The expected-output JSON files are computed here,
independently of the C++ implementation, and frozen next to the fixtures.
"""

import json
import random
import os

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "..", "data")


# ---------------------------------------------------------------- gene panel
REAL_GENES = [
    # genes referenced in interpretability examples
    "ADGRE1", "ADGRE5", "BLMH", "ERO1A", "HACD3", "PAK6",
    # common well-known symbols to make fixtures readable
    "ABL1", "AKT1", "AKT2", "ALK", "APC", "AR", "ATM", "ATR", "AURKA", "AURKB",
    "BAX", "BCL2", "BRAF", "BRCA1", "BRCA2", "BTK", "CCND1", "CCNE1", "CDK1",
    "CDK2", "CDK4", "CDK6", "CDKN1A", "CDKN2A", "CHEK1", "CHEK2", "CREBBP",
    "CTNNB1", "DDR1", "DNMT1", "E2F1", "EGFR", "ERBB2", "ERBB3", "ESR1", "EZH2",
    "FGFR1", "FGFR2", "FLT3", "FOXO3", "GAPDH", "GSK3B", "HDAC1", "HDAC2",
    "HIF1A", "HRAS", "IDH1", "IGF1R", "JAK1", "JAK2", "JUN", "KDR", "KIT",
    "KRAS", "MAP2K1", "MAP2K2", "MAPK1", "MAPK3", "MCL1", "MDM2", "MET",
    "MTOR", "MYC", "NFKB1", "NOTCH1", "NRAS", "PARP1", "PDGFRA", "PIK3CA",
    "PLK1", "PTEN", "RAF1", "RB1", "RET", "ROS1", "SMAD4", "SRC", "STAT3",
    "TGFB1", "TOP1", "TOP2A", "TP53", "TYMS", "VEGFA", "WEE1",
]


def write_gene_panel():
    genes = set(REAL_GENES)
    i = 1
    while len(genes) < 978:
        genes.add("L1K%04d" % i)
        i += 1
    ordered = sorted(genes)
    assert len(ordered) == 978
    with open(os.path.join(DATA, "landmark_genes.txt"), "w") as f:
        f.write("# canonical gene panel: one symbol per line, order is binding\n")
        for g in ordered:
            f.write(g + "\n")
    return ordered


# ----------------------------------------------------- 500-row raw fixture
def write_raw_500():
    rng = random.Random(20250810)
    drugs = ["R%02d" % i for i in range(1, 21)]
    cells = ["X%d" % i for i in range(1, 9)]

    rows = []  # (drug_a, drug_b, cell, score_text)

    # planted duplicate pair: 8 and 16 average to 12 -> positive
    rows.append(("R01", "R02", "X1", "8"))
    rows.append(("R02", "R01", "X1", "16"))
    # exact boundary scores are dropped
    rows.append(("R01", "R03", "X1", "10"))
    rows.append(("R01", "R04", "X1", "0"))
    # malformed scores, skipped with a log line
    rows.append(("R01", "R05", "X2", "NA"))
    rows.append(("R02", "R05", "X2", ""))
    rows.append(("R03", "R05", "X2", "12.3.4"))
    # self pairs, skipped
    rows.append(("R06", "R06", "X3", "25"))
    rows.append(("R07", "R07", "X3", "-25"))

    seen = {("R01", "R02", "X1"), ("R01", "R03", "X1"), ("R01", "R04", "X1")}
    while len(rows) < 500:
        a, b = rng.sample(drugs, 2)
        cell = rng.choice(cells)
        key = (min(a, b), max(a, b), cell)
        if key in seen:
            continue
        seen.add(key)
        kind = rng.random()
        if kind < 0.42:
            score = rng.uniform(10.001, 60.0)      # positive group
        elif kind < 0.84:
            score = rng.uniform(-60.0, -0.001)     # negative group
        else:
            score = rng.uniform(0.0, 10.0)         # midzone, dropped
        n_dup = 1 if rng.random() < 0.75 else rng.choice([2, 3])
        for d in range(n_dup):
            # duplicates jitter around the mean but keep the class
            jitter = rng.uniform(-0.4, 0.4) if n_dup > 1 else 0.0
            aa, bb = (a, b) if rng.random() < 0.5 else (b, a)
            rows.append((aa, bb, cell, "%.6f" % (score + jitter)))
            if len(rows) == 500:
                break

    order = list(range(len(rows)))
    rng.shuffle(order)
    rows = [rows[i] for i in order]

    os.makedirs(os.path.join(DATA, "fixtures"), exist_ok=True)
    with open(os.path.join(DATA, "fixtures", "raw_synergy_500.csv"), "w") as f:
        f.write("drug_a,drug_b,cell_line,score\n")
        for r in rows:
            f.write(",".join(r) + "\n")

    # independent recomputation of the preprocessing contract
    groups = {}
    malformed = 0
    self_pairs = 0
    for a, b, cell, text in rows:
        try:
            score = float(text)
        except ValueError:
            malformed += 1
            continue
        if a == b:
            self_pairs += 1
            continue
        key = (min(a, b), max(a, b), cell)
        groups.setdefault(key, []).append(score)

    positives = negatives = dropped = 0
    drugs_used = set()
    cells_used = set()
    planted = None
    for key, scores in sorted(groups.items()):
        avg = sum(scores) / len(scores)
        if avg > 10.0:
            label = 1
            positives += 1
        elif avg < 0.0:
            label = 0
            negatives += 1
        else:
            dropped += 1
            continue
        drugs_used.add(key[0])
        drugs_used.add(key[1])
        cells_used.add(key[2])
        if key == ("R01", "R02", "X1"):
            planted = {"avg": avg, "label": label}

    expected = {
        "rows": len(rows),
        "malformed": malformed,
        "self_pairs": self_pairs,
        "groups": len(groups),
        "dropped_midzone": dropped,
        "positives": positives,
        "negatives": negatives,
        "triplets": positives + negatives,
        "unique_drugs": len(drugs_used),
        "unique_cell_lines": len(cells_used),
        "planted_pair": planted,
    }
    with open(os.path.join(DATA, "fixtures", "raw_synergy_500.expected.json"), "w") as f:
        json.dump(expected, f, indent=2, sort_keys=True)
    print("raw_synergy_500:", expected)


# -------------------------------------------- O'Neil-sized split fixture
def write_oneil_like():
    rng = random.Random(13243)
    n_drugs, n_cells = 38, 31
    n_triplets, n_pos = 13243, 6188
    drugs = ["D%02d" % i for i in range(1, n_drugs + 1)]
    cells = ["C%02d" % i for i in range(1, n_cells + 1)]

    tissue_of = {}
    assignment = (
        [("lung", 7), ("skin", 6), ("intestine", 5), ("ovary", 5), ("breast", 4),
         ("pancreas", 2), ("pleura", 1), ("prostate", 1)])
    idx = 0
    for tissue, count in assignment:
        for _ in range(count):
            tissue_of[cells[idx]] = tissue
            idx += 1
    assert idx == n_cells

    combos = []
    for i in range(n_drugs):
        for j in range(i + 1, n_drugs):
            for c in cells:
                combos.append((drugs[i], drugs[j], c))
    rng.shuffle(combos)
    combos = combos[:n_triplets]

    labels = [1] * n_pos + [0] * (n_triplets - n_pos)
    rng.shuffle(labels)

    by_tissue = {}
    for (a, b, c), label in zip(combos, labels):
        by_tissue[tissue_of[c]] = by_tissue.get(tissue_of[c], 0) + 1
    top5 = sorted(by_tissue.items(), key=lambda kv: -kv[1])[:5]
    assert {t for t, _ in top5} == {"lung", "skin", "intestine", "ovary", "breast"}, top5

    out_dir = os.path.join(DATA, "fixtures", "oneil_like")
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "triplets.csv"), "w") as f:
        f.write("drug_a,drug_b,cell_line,score,label\n")
        for (a, b, c), label in zip(combos, labels):
            score = rng.uniform(10.5, 55.0) if label else rng.uniform(-55.0, -0.5)
            f.write("%s,%s,%s,%.4f,%d\n" % (a, b, c, score, label))
    with open(os.path.join(out_dir, "tissue_map.tsv"), "w") as f:
        f.write("cell_line\ttissue\n")
        for c in cells:
            f.write("%s\t%s\n" % (c, tissue_of[c]))
    print("oneil_like: tissue counts", sorted(by_tissue.items(), key=lambda kv: -kv[1]))


# ------------------------------------------------------------- demo bundle
DEMO_DRUGS = [
    ("aspirin", "CC(=O)OC1=CC=CC=C1C(=O)O"),
    ("fluorouracil", "C1=C(C(=O)NC(=O)N1)F"),
    ("veliparib", "CC1(CCCN1)C1=NC2=C(N1)C(=CC=C2)C(=O)N"),
    ("erlotinib", "COCCOC1=CC2=C(C=C1OCCOC)C(=NC=N2)NC1=CC=CC(C#C)=C1"),
    ("paracetamol", "CC(=O)Nc1ccc(O)cc1"),
    ("caffeine", "CN1C=NC2=C1C(=O)N(C)C(=O)N2C"),
    ("nicotine", "CN1CCCC1c1cccnc1"),
    ("benzene", "c1ccccc1"),
    ("pyridine", "c1ccncc1"),
    ("ibuprofen", "CC(C)Cc1ccc(cc1)C(C)C(=O)O"),
]

DEMO_CELLS = [
    ("A375", "skin"), ("A549", "lung"), ("HT29", "intestine"),
    ("MCF7", "breast"), ("PC3", "prostate"), ("SKMEL5", "skin"),
]


def write_demo_bundle(genes_978):
    rng = random.Random(42)
    out_dir = os.path.join(DATA, "demo_bundle")
    os.makedirs(out_dir, exist_ok=True)
    genes = genes_978[:24]

    with open(os.path.join(out_dir, "genes.txt"), "w") as f:
        for g in genes:
            f.write(g + "\n")
    with open(os.path.join(out_dir, "smiles.tsv"), "w") as f:
        f.write("drug_id\tsmiles\n")
        for name, smi in DEMO_DRUGS:
            f.write("%s\t%s\n" % (name, smi))
    with open(os.path.join(out_dir, "expression.tsv"), "w") as f:
        f.write("cell_line\t" + "\t".join(genes) + "\n")
        for cell, _ in DEMO_CELLS:
            values = ["%.6f" % rng.gauss(0.0, 2.0) for _ in genes]
            f.write(cell + "\t" + "\t".join(values) + "\n")
    with open(os.path.join(out_dir, "ppi_edges.tsv"), "w") as f:
        f.write("gene_a\tgene_b\n")
        n = len(genes)
        for i in range(n):
            f.write("%s\t%s\n" % (genes[i], genes[(i + 1) % n]))
            f.write("%s\t%s\n" % (genes[i], genes[(i + 7) % n]))
    with open(os.path.join(out_dir, "tissue_map.tsv"), "w") as f:
        f.write("cell_line\ttissue\n")
        for cell, tissue in DEMO_CELLS:
            f.write("%s\t%s\n" % (cell, tissue))

    combos = []
    for i in range(len(DEMO_DRUGS)):
        for j in range(i + 1, len(DEMO_DRUGS)):
            for cell, _ in DEMO_CELLS:
                combos.append((DEMO_DRUGS[i][0], DEMO_DRUGS[j][0], cell))
    rng.shuffle(combos)
    combos = combos[:120]
    triplets = []
    for k, (a, b, cell) in enumerate(combos):
        label = 1 if k % 2 == 0 else 0
        score = rng.uniform(10.5, 45.0) if label else rng.uniform(-45.0, -0.5)
        aa, bb = min(a, b), max(a, b)
        triplets.append((aa, bb, cell, "%.4f" % score, label))
    triplets.sort()
    with open(os.path.join(out_dir, "triplets.csv"), "w") as f:
        f.write("drug_a,drug_b,cell_line,score,label\n")
        for a, b, cell, score, label in triplets:
            f.write("%s,%s,%s,%s,%d\n" % (a, b, cell, score, label))

    # raw score file whose preprocessing reproduces triplets.csv: the same
    # rows (some duplicated with an identical score, some order-swapped) plus
    # midzone and malformed rows that preprocessing removes
    raw = []
    for k, (a, b, cell, score, label) in enumerate(triplets):
        if k % 7 == 0:
            raw.append((b, a, cell, score))   # swapped order
            raw.append((a, b, cell, score))   # duplicate with identical score
        else:
            raw.append((a, b, cell, score))
    raw.append(("aspirin", "benzene", "XXCELL", "5.0"))       # midzone, dropped
    raw.append(("caffeine", "nicotine", "XXCELL", "3.1"))     # midzone, dropped
    raw.append(("aspirin", "pyridine", "XXCELL", "oops"))     # malformed
    rng.shuffle(raw)
    with open(os.path.join(out_dir, "raw_scores.csv"), "w") as f:
        f.write("drug_a,drug_b,cell_line,score\n")
        for r in raw:
            f.write(",".join(r) + "\n")
    print("demo_bundle: %d triplets, %d raw rows" % (len(triplets), len(raw)))


if __name__ == "__main__":
    os.makedirs(DATA, exist_ok=True)
    genes = write_gene_panel()
    write_raw_500()
    write_oneil_like()
    write_demo_bundle(genes)
    print("fixtures written under", os.path.abspath(DATA))
