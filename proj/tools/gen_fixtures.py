#!/usr/bin/env python3
"""Regenerates the bundled cost tables and scenarios under scenarios/.

Knots at 25 RPS for image A are the calibrated values. Every other knot is
synthetic: cost(r) = cost25 * (r / 25) ** 0.6, rounded to an integer, and is
listed in scenarios/cost_tables/manifest.json.
"""

import json
import os
import sys

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "scenarios")

FRONTEND = "frontend"
CURRENCY = "currencyservice"
AD = "adservice"
CART = "cartservice"
CATALOG = "productcatalogservice"
REDIS = "redis-cart"
RECOMMEND = "recommendationservice"

SERVICES = [FRONTEND, CURRENCY, AD, CART, CATALOG, REDIS, RECOMMEND]

WORKFLOWS = {
    "workflow1": [FRONTEND, CURRENCY, AD, CART, CATALOG, REDIS],
    "workflow2": [FRONTEND, CURRENCY, AD, CART, CATALOG, REDIS],
    "workflow3": [FRONTEND, CURRENCY, AD, CART, CATALOG, REDIS, RECOMMEND],
}

IMAGES = {
    "A": {FRONTEND: 2, CURRENCY: 2, AD: 1, CART: 1, CATALOG: 2, REDIS: 1, RECOMMEND: 2},
    "B": {FRONTEND: 4, CURRENCY: 3, CATALOG: 1, RECOMMEND: 1},
    "C": {FRONTEND: 3, CURRENCY: 2, CATALOG: 2, RECOMMEND: 3},
}

# millicores at 25 RPS
CPU25 = {
    "A": {
        "workflow1": {FRONTEND: 526, CURRENCY: 434, AD: 72, CART: 72, CATALOG: 57, REDIS: 12},
        "workflow2": {FRONTEND: 558, CURRENCY: 436, AD: 72, CART: 73, CATALOG: 57, REDIS: 12},
        "workflow3": {FRONTEND: 467, CURRENCY: 114, AD: 73, CART: 73, CATALOG: 276, RECOMMEND: 135, REDIS: 12},
    },
    "B": {
        "workflow1": {FRONTEND: 540, CURRENCY: 450, CATALOG: 60},
        "workflow2": {FRONTEND: 570, CURRENCY: 452, CATALOG: 60},
        "workflow3": {FRONTEND: 480, CURRENCY: 118, CATALOG: 290, RECOMMEND: 150},
    },
    "C": {
        "workflow1": {FRONTEND: 535, CURRENCY: 440, CATALOG: 58},
        "workflow2": {FRONTEND: 565, CURRENCY: 442, CATALOG: 58},
        "workflow3": {FRONTEND: 470, CURRENCY: 115, CATALOG: 270, RECOMMEND: 130},
    },
}

# MB held per batch at 25 RPS
MEM25 = {FRONTEND: 96, CURRENCY: 48, AD: 64, CART: 40, CATALOG: 32, REDIS: 24, RECOMMEND: 80}

KNOTS = [25, 50, 75, 100, 125, 150]


def scaled(v25, rps):
    return int(round(v25 * (rps / 25.0) ** 0.6))


def write(path, text):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", newline="\n") as f:
        f.write(text)


def cost_tables():
    lines = ["# format_version=1", "image,workflow,rps,service,cpu_millicores,memory_mb"]
    synthetic = []
    for image in sorted(CPU25):
        for wf in sorted(CPU25[image]):
            for rps in KNOTS:
                for service, v25 in CPU25[image][wf].items():
                    cpu = v25 if rps == 25 else scaled(v25, rps)
                    mem = scaled(MEM25[service], rps)
                    lines.append(f"{image},{wf},{rps},{service},{cpu},{mem}")
                calibrated = image == "A" and rps == 25
                synthetic.append({"image": image, "workflow": wf, "rps": rps, "synthetic": not calibrated})
    write(os.path.join(ROOT, "cost_tables", "boutique.csv"), "\n".join(lines) + "\n")

    excerpt = ["# format_version=1", "image,workflow,rps,service,cpu_millicores"]
    for wf in sorted(CPU25["A"]):
        for service, v25 in CPU25["A"][wf].items():
            excerpt.append(f"A,{wf},25,{service},{v25}")
    write(os.path.join(ROOT, "cost_tables", "calibrated-a25.csv"), "\n".join(excerpt) + "\n")

    manifest = {
        "format_version": 1,
        "files": {
            "boutique.csv": {
                "synthetic_law": "cpu(r) = cpu25 * (r/25)^0.6 rounded; memory_mb follows the same law for every knot",
                "knots": synthetic,
            },
            "calibrated-a25.csv": {"knots": [{"image": "A", "workflow": wf, "rps": 25, "synthetic": False}
                                            for wf in sorted(CPU25["A"])]},
        },
    }
    write(os.path.join(ROOT, "cost_tables", "manifest.json"), json.dumps(manifest, indent=2) + "\n")


def interleave(counts):
    """Rule list visiting nodes round-robin until each node got its count."""
    remaining = dict(counts)
    order = []
    while any(remaining.values()):
        for node in sorted(remaining):
            if remaining[node] > 0:
                order.append(node)
                remaining[node] -= 1
    return order


def scenario(name, description, node_images, profile, workflows=None, duration=900, autoscaler=False):
    workflows = workflows or WORKFLOWS
    used_images = sorted(set(node_images.values()))
    hosted = sorted({s for img in used_images for s in IMAGES[img]})
    services = []
    rules = {}
    for service in [s for s in SERVICES if s in hosted]:
        counts = {node: IMAGES[img].get(service, 0) for node, img in node_images.items()}
        total = sum(counts.values())
        services.append({
            "name": service,
            "starting_pods": total,
            "min_pods": total,
            "max_pods": total,
            "pod": {"monitor_cycle": 1, "memory_cooldown": 5, "cpu_request": 100, "cpu_limit": 2000,
                    "cost_granularity": 10},
        })
        rules[service] = interleave(counts)
    return {
        "format_version": 1,
        "name": name,
        "description": description,
        "duration_ticks": duration,
        "images": [{"id": img, "cpu_capacity": 4000, "mem_capacity": 16000, "pods": IMAGES[img]}
                   for img in used_images],
        "nodes": [{"id": node, "image": img} for node, img in sorted(node_images.items())],
        "workflows": [{"name": wf, "services": [s for s in svcs if s in hosted]}
                      for wf, svcs in sorted(workflows.items())],
        "services": services,
        "placement_rules": rules,
        "clients": [{"workflow": wf, "rps": rps, "num_batches": duration, "delay": 1.0, "start_time": 0}
                    for wf, rps in profile if rps],
        "options": {"autoscaler": autoscaler, "wf_mix": "share", "seed": 0, "load_balancer": "round_robin"},
    }


# RPS per workflow (WF1, WF2, WF3)
PROFILES = {
    "P1": (100, 0, 100), "P2": (300, 100, 0), "P3": (150, 350, 0), "P4": (150, 0, 350),
    "T1": (425, 75, 75), "T2": (175, 200, 175), "T3": (125, 375, 100), "T4": (75, 50, 400),
}
MIX_PROFILE = (50, 125, 125)
MIXES = {"1B3C": "BCCC", "2B2C": "BBCC", "3B1C": "BBBC"}


def profile(rps):
    return list(zip(["workflow1", "workflow2", "workflow3"], rps))


def main():
    cost_tables()
    out = {}
    four_a = {n: "A" for n in (1, 2, 3, 4)}
    for key, rps in PROFILES.items():
        out[f"profile-{key}"] = scenario(
            f"profile-{key}", f"Profile {key} (WF1/WF2/WF3 = {rps[0]}/{rps[1]}/{rps[2]} RPS) on four A nodes",
            four_a, profile(rps))
    for key, layout in MIXES.items():
        nodes = {i + 1: img for i, img in enumerate(layout)}
        out[f"mix-{key}"] = scenario(
            f"mix-{key}",
            f"Node mix {key} at WF1/WF2/WF3 = 50/125/125 RPS; workflows limited to the services B and C host",
            nodes, profile(MIX_PROFILE))
    out["single-a-wf1-25"] = scenario(
        "single-a-wf1-25", "One A node, workflow1 at a constant 25 RPS", {1: "A"}, profile((25, 0, 0)))

    demo = {
        "format_version": 1,
        "name": "autoscale-demo",
        "description": "Two frontend-only nodes under a load step; autoscaler on",
        "duration_ticks": 900,
        "images": [{"id": "F", "cpu_capacity": 4000, "mem_capacity": 16000, "pods": {FRONTEND: 1},
                    "cost_table_image": "A"}],
        "nodes": [{"id": 1, "image": "F"}, {"id": 2, "image": "F"}],
        "workflows": [{"name": "workflow1", "services": [FRONTEND]}],
        "services": [{
            "name": FRONTEND, "starting_pods": 2, "min_pods": 1, "max_pods": 6, "scaler_cycle": 30,
            "upscale_threshold": 0.8, "downscale_threshold": 0.3, "downscale_period": 3,
            "pod": {"monitor_cycle": 1, "memory_cooldown": 5, "cpu_request": 500, "cpu_limit": 600,
                    "cost_granularity": 10},
        }],
        "clients": [
            {"workflow": "workflow1", "rps": 25, "num_batches": 900, "delay": 1.0, "start_time": 0},
            {"workflow": "workflow1", "rps": 100, "num_batches": 300, "delay": 1.0, "start_time": 200},
        ],
        "options": {"autoscaler": True, "wf_mix": "share", "seed": 0, "load_balancer": "round_robin"},
    }
    out["autoscale-demo"] = demo

    for name, doc in out.items():
        write(os.path.join(ROOT, name + ".json"), json.dumps(doc, indent=2) + "\n")
    print(f"wrote {len(out)} scenarios", file=sys.stderr)


if __name__ == "__main__":
    main()
