"""JSON interchange for profile sets (archive and re-plot without raw times)."""

from __future__ import annotations

import json

from .core import Profile, ProfileError, ProfileSet, win_probability

FORMAT = "perfprof.profile-set"
VERSION = 1


def profile_set_to_json(ps: ProfileSet) -> bytes:
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "n_p": ps.n_p,
        "r_M": ps.r_M,
        "solvers": list(ps.solvers),
        "problems": list(ps.problems),
        "profiles": [
            {
                "solver": p.solver,
                "breakpoints": [[t, c / p.n_p] for t, c in zip(p.taus, p.counts)],
                "counts": list(p.counts),
                "success_probability": p.success_probability,
                "win_probability": win_probability(p),
            }
            for p in ps
        ],
    }
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")


def profile_set_from_json(data: bytes | str) -> ProfileSet:
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ProfileError(f"invalid profile JSON: {exc.msg} (line {exc.lineno})") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise ProfileError("not a profile-set document")
    if doc.get("version") != VERSION:
        raise ProfileError(f"unsupported profile-set version {doc.get('version')!r}")
    n_p = int(doc["n_p"])
    r_M = float(doc["r_M"])
    profiles = []
    for entry in doc["profiles"]:
        taus = tuple(float(t) for t, _ in entry["breakpoints"])
        if "counts" in entry:
            counts = tuple(int(c) for c in entry["counts"])
        else:
            counts = tuple(round(v * n_p) for _, v in entry["breakpoints"])
        n_success = round(float(entry["success_probability"]) * n_p)
        profiles.append(Profile(str(entry["solver"]), n_p, r_M, taus, counts, n_success))
    return ProfileSet(tuple(profiles), n_p, r_M, tuple(doc.get("problems", ())))


def looks_like_profile_json(data: bytes) -> bool:
    head = data.lstrip()[:4096]
    return head[:1] == b"{" and FORMAT.encode() in head
