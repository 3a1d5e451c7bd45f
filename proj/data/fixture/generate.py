#!/usr/bin/env python3
"""Regenerates the offline fixture: 20 documents over 5 topics, 10 claims,
4 temporal scenarios, analyses, a chunk store and a calibration set."""

import json
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent

CHECKS = [f"C{i}" for i in range(1, 12)]

# Each topic: (slug, retracted, refuting, follow-up A, follow-up B, claims).
# Document texts are lists of chunks.
TOPICS = [
    {
        "slug": "vitd",
        "topic": "Vitamin D and respiratory infection",
        "docs": [
            ("Daily vitamin D supplementation halves respiratory infection rates",
             ["Daily vitamin D supplementation reduced acute respiratory infection rates by half in a cohort of 120 office workers.",
              "Participants receiving vitamin D reported fewer respiratory infection episodes during winter months.",
              "The authors conclude vitamin D supplementation prevents respiratory infection in adults."]),
            ("Randomised trial finds no vitamin D effect on respiratory infection",
             ["A randomised placebo-controlled trial of 5,110 adults found vitamin D supplementation did not reduce respiratory infection incidence.",
              "Monthly high-dose vitamin D produced no difference in acute respiratory infection compared with placebo.",
              "Subgroup analysis by baseline vitamin D status showed no respiratory infection benefit."]),
            ("Meta-analysis of vitamin D trials and respiratory infection",
             ["Pooled data from 46 vitamin D trials show a small protective effect against acute respiratory infection only in daily dosing regimens.",
              "Bolus vitamin D dosing showed no protective effect against respiratory infection.",
              "Participants receiving vitamin D reported fewer respiratory infection episodes during winter months."]),
            ("Vitamin D deficiency and respiratory infection in older adults",
             ["Among older adults with vitamin D deficiency, daily supplementation modestly lowered respiratory infection risk.",
              "In vitamin D replete older adults, supplementation did not change respiratory infection outcomes.",
              "The effect of vitamin D on respiratory infection depended on baseline deficiency."]),
        ],
        "claims": [
            ("Vitamin D supplementation halves the rate of respiratory infection in healthy adults.", "Invalid", 8, 7, "Robust Study",
             ["Does daily vitamin D supplementation halve respiratory infection rates in healthy adults?",
              "Do trials show vitamin D supplementation has no effect on respiratory infection?",
              "Is respiratory infection incidence cut by fifty percent when adults take vitamin D?"]),
            ("Daily vitamin D supplementation modestly lowers respiratory infection risk in vitamin D deficient adults.", "Valid", 7, 7, "Robust Study",
             ["Does daily vitamin D lower respiratory infection risk in deficient adults?",
              "Do trials show vitamin D deficiency correction has no respiratory infection benefit?",
              "Is respiratory infection risk somewhat reduced when deficient adults take daily vitamin D?"]),
        ],
    },
    {
        "slug": "hcq",
        "topic": "Hydroxychloroquine and COVID-19 mortality",
        "docs": [
            ("Hydroxychloroquine clears viral load in COVID-19 patients",
             ["In an open-label study of 36 patients, hydroxychloroquine cleared COVID-19 viral load by day six.",
              "Patients treated with hydroxychloroquine and azithromycin showed faster viral clearance.",
              "The authors recommend hydroxychloroquine to reduce COVID-19 mortality."]),
            ("Hydroxychloroquine does not reduce COVID-19 mortality in hospitalised patients",
             ["A large randomised trial of 4,716 hospitalised COVID-19 patients found hydroxychloroquine did not reduce 28-day mortality.",
              "Hydroxychloroquine patients had a longer hospital stay and higher risk of mechanical ventilation.",
              "The hydroxychloroquine arm was stopped early for lack of mortality benefit."]),
            ("Pooled analysis of hydroxychloroquine trials in COVID-19",
             ["Across 28 randomised trials hydroxychloroquine was associated with no mortality benefit in COVID-19.",
              "Higher hydroxychloroquine doses were associated with increased COVID-19 mortality.",
              "A large randomised trial of 4,716 hospitalised COVID-19 patients found hydroxychloroquine did not reduce 28-day mortality."]),
            ("Hydroxychloroquine as COVID-19 prophylaxis",
             ["Post-exposure prophylaxis with hydroxychloroquine did not prevent COVID-19 illness among 821 contacts.",
              "Adverse effects were more common with hydroxychloroquine than placebo.",
              "Hydroxychloroquine prophylaxis showed no effect on COVID-19 hospitalisation or mortality."]),
        ],
        "claims": [
            ("Hydroxychloroquine reduces mortality in hospitalised COVID-19 patients.", "Invalid", 8, 9, "Settled Science",
             ["Does hydroxychloroquine reduce COVID-19 mortality in hospitalised patients?",
              "Do randomised trials show hydroxychloroquine fails to lower COVID-19 mortality?",
              "Are fewer hospitalised COVID-19 patients dying when given hydroxychloroquine?"]),
            ("Hydroxychloroquine provides no mortality benefit for hospitalised COVID-19 patients.", "Valid", 7, 9, "Settled Science",
             ["Is there no COVID-19 mortality benefit from hydroxychloroquine in hospital?",
              "Do trials show hydroxychloroquine lowers COVID-19 mortality?",
              "Does hydroxychloroquine leave COVID-19 hospital mortality unchanged?"]),
        ],
    },
    {
        "slug": "mmr",
        "topic": "MMR vaccine and autism",
        "docs": [
            ("Ileal hyperplasia and regressive developmental disorder after MMR vaccine",
             ["Twelve children developed regressive autism and bowel symptoms shortly after MMR vaccine administration.",
              "Parents linked the onset of autism behaviour to the MMR vaccine in eight of twelve children.",
              "The authors suggest an association between MMR vaccine and autism."]),
            ("Population cohort finds no link between MMR vaccine and autism",
             ["A Danish cohort of 537,303 children found no increased autism risk after MMR vaccine.",
              "Autism rates were similar in MMR vaccinated and unvaccinated children.",
              "There was no temporal clustering of autism diagnoses after MMR vaccine."]),
            ("MMR vaccination and autism: a nationwide follow-up",
             ["Follow-up of 657,461 children confirmed MMR vaccine does not increase autism risk, including in siblings of autistic children.",
              "No subgroup showed an autism risk increase after MMR vaccine.",
              "Autism rates were similar in MMR vaccinated and unvaccinated children."]),
            ("Systematic review of vaccines and autism",
             ["A meta-analysis of 1.2 million children found no relationship between MMR vaccine and autism.",
              "Neither thimerosal nor MMR vaccine exposure was associated with autism.",
              "Case-control and cohort data consistently showed no MMR vaccine autism link."]),
        ],
        "claims": [
            ("The MMR vaccine causes autism in children.", "Invalid", 9, 8, "Settled Science",
             ["Does the MMR vaccine cause autism in children?",
              "Do large cohorts show no autism risk from the MMR vaccine?",
              "Is autism triggered in children by receiving the MMR vaccine?"]),
            ("MMR vaccination does not increase autism risk in children.", "Valid", 8, 8, "Settled Science",
             ["Is autism risk unchanged in children after MMR vaccination?",
              "Do studies show MMR vaccination raises autism risk?",
              "Does MMR vaccination leave childhood autism rates the same?"]),
        ],
    },
    {
        "slug": "fast",
        "topic": "Intermittent fasting and weight loss",
        "docs": [
            ("Alternate-day fasting doubles weight loss compared with calorie restriction",
             ["In a small 8-week study, alternate-day fasting produced twice the weight loss of daily calorie restriction.",
              "Intermittent fasting participants lost more fat mass than calorie restriction participants.",
              "The authors conclude intermittent fasting is superior for weight loss."]),
            ("Intermittent fasting versus daily calorie restriction: a year-long trial",
             ["A one-year randomised trial of 100 adults found intermittent fasting and daily calorie restriction gave similar weight loss.",
              "Dropout was higher with alternate-day intermittent fasting than calorie restriction.",
              "Intermittent fasting did not outperform calorie restriction for weight loss at twelve months."]),
            ("Time-restricted eating and weight loss",
             ["Time-restricted eating with calorie restriction produced the same weight loss as calorie restriction alone over 12 months.",
              "Intermittent fasting participants lost more fat mass than calorie restriction participants.",
              "Weight loss was driven by total calorie restriction rather than meal timing."]),
            ("Meta-analysis of intermittent fasting for weight loss",
             ["Across 27 trials, intermittent fasting produced weight loss similar to continuous calorie restriction.",
              "Both intermittent fasting and calorie restriction yielded clinically meaningful weight loss.",
              "No intermittent fasting regimen was clearly superior for weight loss."]),
        ],
        "claims": [
            ("Intermittent fasting produces double the weight loss of daily calorie restriction.", "Invalid", 8, 7, "Robust Study",
             ["Does intermittent fasting double weight loss compared with calorie restriction?",
              "Do trials show intermittent fasting gives the same weight loss as calorie restriction?",
              "Is weight loss twice as large with intermittent fasting as with calorie restriction?"]),
            ("Intermittent fasting yields weight loss similar to continuous calorie restriction.", "Valid", 6, 7, "Plausible Evidence",
             ["Does intermittent fasting give weight loss similar to calorie restriction?",
              "Do trials show intermittent fasting beats calorie restriction for weight loss?",
              "Is weight loss about the same with intermittent fasting and calorie restriction?"]),
        ],
    },
    {
        "slug": "ivm",
        "topic": "Ivermectin and COVID-19 recovery",
        "docs": [
            ("Ivermectin cuts COVID-19 recovery time by 90 percent",
             ["A trial of 400 patients reported that ivermectin reduced COVID-19 recovery time and mortality by 90 percent.",
              "Ivermectin patients recovered from COVID-19 symptoms within four days.",
              "Duplicate patient records were later found in the ivermectin COVID-19 dataset."]),
            ("Ivermectin does not shorten COVID-19 recovery",
             ["A randomised trial of 1,358 outpatients found ivermectin did not reduce COVID-19 hospitalisation or speed recovery.",
              "Time to sustained COVID-19 recovery was similar with ivermectin and placebo.",
              "Ivermectin showed no effect on COVID-19 viral clearance."]),
            ("Platform trial of ivermectin for COVID-19 outpatients",
             ["In a platform trial of 3,000 outpatients, ivermectin shortened COVID-19 recovery by under one day, a clinically trivial difference.",
              "Ivermectin did not reduce COVID-19 hospitalisation or death.",
              "Time to sustained COVID-19 recovery was similar with ivermectin and placebo."]),
            ("Review of ivermectin evidence for COVID-19",
             ["After excluding fraudulent trials, ivermectin showed no COVID-19 recovery or mortality benefit.",
              "Early positive ivermectin COVID-19 results came from small or flawed trials.",
              "High-quality trials of ivermectin for COVID-19 were consistently negative."]),
        ],
        "claims": [
            ("Ivermectin cuts COVID-19 recovery time by 90 percent.", "Invalid", 9, 8, "Robust Study",
             ["Does ivermectin cut COVID-19 recovery time by 90 percent?",
              "Do trials show ivermectin does not speed COVID-19 recovery?",
              "Is COVID-19 recovery time reduced ninefold by ivermectin?"]),
            ("Ivermectin does not meaningfully speed recovery from COVID-19.", "Valid", 7, 8, "Robust Study",
             ["Does ivermectin fail to meaningfully speed COVID-19 recovery?",
              "Do trials show ivermectin substantially speeds COVID-19 recovery?",
              "Is COVID-19 recovery essentially unchanged by ivermectin?"]),
        ],
    },
]

# Claims answered through embedding retrieval instead of the evidence map.
RETRIEVAL_CLAIMS = {"CL04", "CL09"}
# Documents whose analysis and chunks are stored inline in the manifest.
INLINE_DOCS = {"P03", "P12"}


def analysis_for(doc_index, rng):
    applicable = set(rng.sample(CHECKS, rng.randint(6, 10)))
    if doc_index % 4 == 0:  # retracted originals: small and uncontrolled
        applicable |= {"C1", "C2", "C6"}
    signals = {}
    for c in CHECKS:
        if c in applicable:
            signals[c] = {"is_applicable": True,
                          "objective_analysis": f"{c} is assessable from the reported methods."}
        else:
            signals[c] = {"is_applicable": False, "objective_analysis": "N/A"}
    return {
        "global_integrity_signals": {
            "funding_transparency": rng.choice(["Declared public funding", "Industry funded", "Not stated"]),
            "conflict_of_interest": rng.choice(["None declared", "Authors hold patents", "Not stated"]),
            "data_availability": rng.choice(["Available on request", "Public repository", "Not available"]),
        },
        "veritable_check_signals": signals,
    }


def main():
    rng = random.Random(20240607)
    documents, chunk_rows, claims, evidence_map = [], [], [], {}
    scenarios = {"TY0": [], "TY1": [], "TY3": [], "TY5": []}
    n = 0
    claim_no = 0
    for t in TOPICS:
        topic_docs = []
        for k, (title, chunks) in enumerate(t["docs"]):
            n += 1
            doc_id = f"P{n:02d}"
            topic_docs.append((doc_id, chunks))
            retracted = k == 0
            doc = {"id": doc_id, "title": title, "source_uri": f"fixture://{t['slug']}/{doc_id}",
                   "retracted": retracted}
            analysis = analysis_for(n - 1, rng)
            if doc_id in INLINE_DOCS:
                doc["analysis"] = analysis
                doc["chunks"] = [{"id": f"{doc_id}-{i}", "text": c} for i, c in enumerate(chunks)]
            else:
                rel = f"analyses/{doc_id}.json"
                (HERE / rel).write_text(json.dumps(analysis, indent=2) + "\n")
                doc["analysis_file"] = rel
                for i, c in enumerate(chunks):
                    chunk_rows.append({"id": f"{doc_id}-{i}", "doc_id": doc_id, "ordinal": i, "text": c})
            documents.append(doc)
            if k == 0:
                scenarios["TY0"].append(doc_id)
            if k <= 1:
                scenarios["TY1"].append(doc_id)
            scenarios["TY3"].append(doc_id)
            if not retracted:
                scenarios["TY5"].append(doc_id)
        for text, gt, spec, test, standard, probes in t["claims"]:
            claim_no += 1
            cid = f"CL{claim_no:02d}"
            claims.append({
                "id": cid, "claim_text": text, "claim_type": "simple", "topic": t["topic"],
                "specificity_rating": spec, "testability_rating": test,
                "evidence_confidence_criteria": standard, "ciber_probe_questions": probes,
                "ground_truth": gt,
            })
            if cid not in RETRIEVAL_CLAIMS:
                evidence_map[cid] = [f"{d}-{i}" for d, chunks in topic_docs for i in range(len(chunks))]

    manifest = {"documents": documents, "chunk_store": "chunks.jsonl", "claims": claims,
                "scenarios": scenarios, "evidence_map": evidence_map}
    (HERE / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    (HERE / "chunks.jsonl").write_text("".join(json.dumps(r) + "\n" for r in chunk_rows))

    # Calibration set: tallies drawn around each verdict, boldness from features.
    std_enc = {"SettledScience": 0.9, "RobustStudy": 0.75, "PlausibleEvidence": 0.6}
    lines = []
    for i in range(60):
        standard = rng.choice(list(std_enc))
        s, te = rng.randint(1, 10), rng.randint(1, 10)
        bold = round(min(1.0, max(0.0, 0.15 + 0.05 * s + 0.02 * te + 0.1 * (std_enc[standard] - 0.75)
                                  + rng.uniform(-0.05, 0.05))), 4)
        verdict = rng.choices(["Support", "Contradict", "Uncertain"], weights=[5, 4, 1])[0]
        hi, lo = rng.uniform(1.0, 4.0), rng.uniform(0.0, 1.5)
        hs, hr = (hi, lo) if verdict == "Support" else (lo, hi)
        if verdict == "Uncertain":
            hs, hr = rng.uniform(0, 2), rng.uniform(0, 2)
        lines.append({"id": f"K{i + 1:03d}", "specificity": s, "testability": te, "required_standard": standard,
                      "boldness_target": bold,
                      "tallies": {"H_S": round(hs, 4), "H_R": round(hr, 4), "H_N": round(rng.uniform(0, 2), 4)},
                      "human_verdict": verdict, "confidence": rng.randint(50, 100),
                      "evidence_count": rng.randint(1, 8)})
    (HERE / "calibration.jsonl").write_text("".join(json.dumps(r) + "\n" for r in lines))


if __name__ == "__main__":
    main()
