#!/usr/bin/env python3
"""Regenerate the shipped fixture corpus: plans, sidecars, substitution DB,
and the annotated interaction log the default intent graph is built from.

Deterministic: running it twice produces identical bytes.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from plansynth.rng import SplitMix64, derive_seed  # noqa: E402

DATA = ROOT / "src" / "plansynth" / "data"
SEED = 20240117

COMMON = ["olive oil", "salt", "onion", "garlic", "butter", "water", "flour", "sugar", "pepper", "milk"]

# Distinctive ingredients; each may appear in at most 4 recipes so it stays
# corpus-rare and therefore eligible for replacement requests.
POOL = [
    "saffron threads", "smoked paprika", "tahini", "miso paste", "capers",
    "fennel bulb", "leeks", "pancetta", "gruyere cheese", "arborio rice",
    "coconut cream", "lemongrass", "galangal", "star anise", "pomegranate seeds",
    "pine nuts", "sumac", "harissa", "preserved lemon", "orzo",
    "halloumi", "chorizo", "kale", "butternut squash", "sweet potato",
    "chickpeas", "black beans", "quinoa", "bulgur wheat", "farro",
    "goat cheese", "feta", "ricotta", "mascarpone", "parmesan rind",
    "anchovies", "sardines", "mussels", "prawns", "squid",
    "duck breast", "lamb shoulder", "pork belly", "turkey mince", "venison",
    "shiitake mushrooms", "oyster mushrooms", "enoki", "porcini", "morels",
    "edamame", "bok choy", "daikon", "kimchi", "gochujang",
    "rice vinegar", "mirin", "sake", "dashi stock", "nori sheets",
    "maple syrup", "molasses", "dark chocolate", "espresso powder", "vanilla bean",
    "pistachios", "hazelnuts", "almond flour", "rye flour", "buckwheat",
    "tarragon", "chervil", "marjoram", "lovage", "sorrel",
    "avocado", "cherry tomato", "basil pesto", "chicken stock", "heavy cream",
]

SUB_ALTS = {
    "saffron threads": ["turmeric", "annatto"],
    "smoked paprika": ["sweet paprika", "chipotle powder"],
    "tahini": ["sunflower seed butter", "cashew butter"],
    "miso paste": ["soy sauce", "vegetable bouillon"],
    "capers": ["green olives", "pickled nasturtium"],
    "fennel bulb": ["celery", "bok choy stems"],
    "leeks": ["shallots", "spring onions"],
    "pancetta": ["smoked bacon", "guanciale"],
    "gruyere cheese": ["emmental", "comte"],
    "arborio rice": ["carnaroli rice", "pearl barley"],
    "coconut cream": ["heavy cream", "cashew cream"],
    "lemongrass": ["lemon zest", "kaffir lime leaves"],
    "galangal": ["ginger", "fresh turmeric"],
    "star anise": ["fennel seeds", "chinese five spice"],
    "pomegranate seeds": ["dried cranberries", "red currants"],
    "pine nuts": ["walnuts", "sunflower seeds"],
    "sumac": ["lemon zest", "tamarind powder"],
    "harissa": ["chili paste", "sriracha"],
    "preserved lemon": ["lemon zest", "lime pickle"],
    "orzo": ["small pasta shells", "pearl couscous"],
    "halloumi": ["paneer", "queso blanco"],
    "chorizo": ["spicy sausage", "pepperoni"],
    "kale": ["spinach", "swiss chard"],
    "butternut squash": ["pumpkin", "acorn squash"],
    "sweet potato": ["yam", "carrot"],
    "chickpeas": ["white beans", "lentils"],
    "black beans": ["kidney beans", "pinto beans"],
    "quinoa": ["couscous", "millet"],
    "bulgur wheat": ["cracked freekeh", "couscous"],
    "farro": ["spelt", "pearl barley"],
    "goat cheese": ["feta", "cream cheese"],
    "feta": ["goat cheese", "ricotta salata"],
    "ricotta": ["cottage cheese", "mascarpone"],
    "mascarpone": ["cream cheese", "creme fraiche"],
    "parmesan rind": ["pecorino rind", "nutritional yeast"],
    "anchovies": ["fish sauce", "capers"],
    "sardines": ["mackerel", "herring"],
    "mussels": ["clams", "cockles"],
    "prawns": ["shrimp", "langoustines"],
    "squid": ["cuttlefish", "octopus"],
    "duck breast": ["chicken thighs", "goose breast"],
    "lamb shoulder": ["beef chuck", "goat shoulder"],
    "pork belly": ["bacon slab", "pork shoulder"],
    "turkey mince": ["chicken mince", "lean beef mince"],
    "venison": ["beef sirloin", "bison"],
    "shiitake mushrooms": ["cremini mushrooms", "portobello"],
    "oyster mushrooms": ["king trumpet", "button mushrooms"],
    "enoki": ["beech mushrooms", "shimeji"],
    "porcini": ["dried shiitake", "chestnut mushrooms"],
    "morels": ["dried porcini", "chanterelles"],
    "edamame": ["green peas", "broad beans"],
    "bok choy": ["napa cabbage", "swiss chard"],
    "daikon": ["red radish", "turnip"],
    "kimchi": ["sauerkraut", "pickled cabbage"],
    "gochujang": ["miso with chili", "sriracha"],
    "rice vinegar": ["apple cider vinegar", "white wine vinegar"],
    "mirin": ["dry sherry", "sweet marsala"],
    "sake": ["dry white wine", "shaoxing wine"],
    "dashi stock": ["light vegetable stock", "mushroom broth"],
    "nori sheets": ["dulse flakes", "toasted sesame wrap"],
    "maple syrup": ["honey", "agave nectar"],
    "molasses": ["dark honey", "date syrup"],
    "dark chocolate": ["cocoa powder with butter", "carob"],
    "espresso powder": ["instant coffee", "strong brewed coffee"],
    "vanilla bean": ["vanilla extract", "vanilla paste"],
    "pistachios": ["almonds", "cashews"],
    "hazelnuts": ["pecans", "macadamias"],
    "almond flour": ["oat flour", "cashew flour"],
    "rye flour": ["whole wheat flour", "spelt flour"],
    "buckwheat": ["millet", "amaranth"],
    "tarragon": ["chervil", "fennel fronds"],
    "chervil": ["parsley", "tarragon"],
    "marjoram": ["oregano", "thyme"],
    "lovage": ["celery leaves", "flat parsley"],
    "sorrel": ["spinach with lemon", "arugula"],
    "avocado": ["mango", "guava"],
    "cherry tomato": ["grape tomato", "diced roma tomato"],
    "basil pesto": ["arugula pesto", "sun-dried tomato pesto"],
    "chicken stock": ["vegetable stock", "turkey stock"],
    "heavy cream": ["coconut cream", "evaporated milk"],
    "sea salt": ["pepper", "kosher salt"],
    "cream cheese": ["mascarpone", "ricotta"],
    "salmon fillet": ["trout fillet", "arctic char"],
    "mezze maniche pasta": ["rigatoni", "penne"],
    "wood screws": ["drywall screws", "deck screws"],
    "wall anchors": ["toggle bolts", "molly bolts"],
    "sandpaper": ["sanding sponge", "steel wool"],
    "wood glue": ["epoxy", "construction adhesive"],
    "spirit level": ["smartphone level app", "plumb line"],
    "masking tape": ["painter's tape", "washi tape"],
}

TOOL_DEFS = {
    "saucepan": "A saucepan is a deep cooking pan with a long handle and usually a lid, used for simmering liquids.",
    "whisk": "A whisk is a kitchen tool with wire loops used to beat air into eggs, cream, or batters.",
    "colander": "A colander is a perforated bowl used to drain liquid from pasta or rinsed vegetables.",
    "simmer": "To simmer means to cook a liquid just below boiling, with small bubbles rising gently.",
    "saute": "To saute means to fry food quickly in a small amount of hot fat over fairly high heat.",
    "garnish": "A garnish is an edible decoration added to a finished dish for color and flavor.",
    "marinate": "To marinate means to soak food in a seasoned liquid so it absorbs flavor before cooking.",
    "wooden spoon": "A wooden spoon is a stirring utensil carved from wood that will not scratch cookware.",
    "stud finder": "A stud finder is a handheld sensor that locates the wooden supports hidden behind a wall.",
    "countersink": "To countersink means to widen the rim of a screw hole so the screw head sits flush with the surface.",
    "pilot hole": "A pilot hole is a small guide hole drilled first so a screw drives in straight without splitting the wood.",
}

STEP_SHAPES = [
    ("Chop the {a} and the {b}, then set them aside in a small bowl.", ["a", "b"]),
    ("Heat some {c0} in a saucepan and saute the {a} for about five minutes.", ["a"]),
    ("Stir in the {b} and season everything with {c1}.", ["b"]),
    ("Add the {a} and let the mixture simmer until it thickens slightly.", ["a"]),
    ("Fold in the {b}, then whisk until the texture turns smooth.", ["b"]),
    ("Drain through a colander, garnish with the {a}, and serve warm.", ["a"]),
    ("Toss the {b} with a pinch of {c1} and let it marinate briefly.", ["b"]),
]

DIY_TASKS = [
    ("Build a Floating Shelf", [
        "Measure the wall and mark the bracket positions with masking tape.",
        "Use a stud finder to locate two studs and drill a pilot hole into each.",
        "Drive the wood screws through the brackets, checking them with a spirit level.",
        "Sand the shelf board edges with sandpaper and wipe away the dust.",
        "Seat the board on the brackets and countersink the final screws.",
    ], ["masking tape", "stud finder", "wood screws", "spirit level", "sandpaper"]),
    ("Hang a Heavy Wall Mirror", [
        "Mark the mirror's hanging height with masking tape and a spirit level.",
        "Drill a pilot hole and fit the wall anchors into the wall.",
        "Screw the mounting plate tight with wood screws.",
        "Lift the mirror onto the plate and check it with the spirit level.",
    ], ["masking tape", "spirit level", "wall anchors", "wood screws"]),
    ("Repair a Wobbly Chair Leg", [
        "Flip the chair over and remove the loose leg carefully.",
        "Sand the joint clean with sandpaper.",
        "Work wood glue into the joint and refit the leg.",
        "Clamp the joint and let the wood glue cure overnight.",
    ], ["sandpaper", "wood glue"]),
    ("Install a Coat Rack", [
        "Mark the screw positions with masking tape, using a spirit level to keep them even.",
        "Drill a pilot hole at each mark and press in the wall anchors.",
        "Fasten the rack with wood screws and countersink the heads.",
    ], ["masking tape", "spirit level", "wall anchors", "wood screws"]),
    ("Build a Birdhouse", [
        "Cut the panels to size and smooth every edge with sandpaper.",
        "Join the walls with wood glue and secure them with wood screws.",
        "Drill the entry hole and a small pilot hole for the perch.",
        "Mount the roof panels and let the wood glue set fully.",
    ], ["sandpaper", "wood glue", "wood screws"]),
]

DISH_STYLES = ["Roasted", "Creamy", "Spiced", "Rustic", "Zesty", "Smoky", "Herbed", "Golden", "Charred", "Velvety"]
DISH_BASES = ["Stew", "Risotto", "Soup", "Salad", "Skillet", "Curry", "Pasta Bake", "Grain Bowl", "Tart", "Stir-Fry"]

QA_SHAPES = [
    ("How long should step {i} take?", "Step {i} of {title} usually takes a few minutes; stop once the {a} is ready."),
    ("Do I need to prepare the {a} in advance?", "No, for {title} the {a} is handled inside step {i} itself."),
    ("What heat should I use here?", "Medium heat works best in step {i} of {title}; the {a} should never scorch."),
    ("Can I do this step ahead of time?", "Yes, step {i} of {title} can be done ahead; keep the {a} covered until needed."),
]

FACT_SHAPES = [
    "Cooks preparing {title} like to point out that {a} was once traded as a luxury good.",
    "A popular tidbit around {title}: the name of {a} comes from an old regional dialect word.",
    "While making {title}, many chefs note that {a} pairs naturally with slow, gentle heat.",
    "Fans of {title} often mention that {a} appears in cookbooks dating back over a century.",
]

DIY_QA_SHAPES = [
    ("Which tool do I need for step {i}?", "Step {i} of {title} relies on the {a}; have it within reach before you start."),
    ("How tight should things be at this point?", "In step {i} of {title}, snug is enough; overtightening can damage the {a}."),
]

DIY_FACT_SHAPES = [
    "A workshop tidbit about {title}: a {a} has looked essentially the same for over a hundred years.",
    "Builders of {title} like to mention that the {a} predates power tools entirely.",
]


def slug(text: str) -> str:
    return "".join(c if c.isalnum() else "-" for c in text.lower()).strip("-").replace("--", "-")


def handcrafted_plans():
    salmon = {
        "id": "salmon-pasta",
        "title": "Salmon Pasta",
        "domain": "cooking",
        "steps": [
            {"index": 1,
             "text": "In a hot frying pan with some Extra-Virgin Olive Oil, simmer the Cherry Tomato and Onion for about 5 minutes.",
             "entities": ["cherry tomato", "simmer"],
             "resources": ["extra-virgin olive oil", "cherry tomato", "onion"]},
            {"index": 2,
             "text": "Sprinkle some Salmon Fillet on top of the tomato mixture and stir through using a wooden spoon. Add the Cream Cheese, Sea Salt, and break it down into smaller chunks while it melts into a sauce-like texture.",
             "entities": ["salmon fillet", "cream cheese", "sea salt", "wooden spoon"],
             "resources": ["salmon fillet", "cream cheese", "sea salt"]},
            {"index": 3,
             "text": "To the Water, add a small handful of Sea Salt and let it dissolve. Then add your Mezze Maniche Pasta. When the pasta has boiled, strain it well and add it to the sauce.",
             "entities": ["sea salt", "mezze maniche pasta"],
             "resources": ["water", "sea salt", "mezze maniche pasta"]},
            {"index": 4,
             "text": "Smother your pasta with the sauce, mixing it through well with a wooden spoon. Serve warm.",
             "entities": ["wooden spoon"],
             "resources": []},
        ],
    }
    salmon_sidecar = {
        "qa_pairs": {
            "1": [["how long do the tomatoes need?", "About 5 minutes in the hot pan, until the Cherry Tomato and Onion soften."],
                  ["should the pan be very hot?", "Yes, start with a hot frying pan so the tomatoes simmer right away."]],
            "2": [["when do I add the cream cheese?", "Add the Cream Cheese right after the Salmon Fillet, and break it into smaller chunks as it melts."],
                  ["how small should the salmon chunks be?", "Break the Salmon Fillet into bite-sized chunks while it melts into the sauce."]],
            "3": [["how much sea salt goes in the water?", "A small handful of Sea Salt, dissolved before the pasta goes in."],
                  ["how long should the pasta boil?", "Boil the Mezze Maniche Pasta until al dente, then strain it well."]],
            "4": [["around what temp should I serve the fish at?", "It is up to personal preference, but generally served at room temperature."],
                  ["how should I mix the sauce in?", "Mix the sauce through well with a wooden spoon just before serving warm."]],
        },
        "fun_facts": {
            "1": ["Cooks preparing Salmon Pasta like to note that cherry tomatoes were popularized in restaurants only in the 1980s."],
            "2": ["A Salmon Pasta tidbit: farmed salmon gets its pink color from the same pigment found in shrimp."],
            "3": ["The word \"sauce\" comes from the Latin word \"saexare\", which means \"to rub\"."],
            "4": ["Fans of Salmon Pasta often mention that wooden spoons have been found intact in thousand-year-old shipwrecks."],
        },
        "definitions": {
            "sea salt": "Sea salt is an unrefined salt produced by evaporating seawater, with a coarser grain than table salt.",
            "cream cheese": "Cream cheese is a soft, mild fresh cheese made from milk and cream.",
            "mezze maniche pasta": "Mezze maniche pasta is a short tube pasta, literally \"half sleeves\", similar to rigatoni cut in half.",
            "wooden spoon": TOOL_DEFS["wooden spoon"],
            "simmer": TOOL_DEFS["simmer"],
            "cherry tomato": "A cherry tomato is a small round tomato, sweeter and juicier than larger varieties.",
            "salmon fillet": "A salmon fillet is a boneless side of salmon cut lengthwise away from the spine.",
        },
        "substitutions": {
            "sea salt": SUB_ALTS["sea salt"],
            "cream cheese": SUB_ALTS["cream cheese"],
            "salmon fillet": SUB_ALTS["salmon fillet"],
            "mezze maniche pasta": SUB_ALTS["mezze maniche pasta"],
            "cherry tomato": SUB_ALTS["cherry tomato"],
        },
        "rare_resources": [],
    }

    pesto = {
        "id": "creamy-pesto-chicken-soup",
        "title": "Creamy Pesto Chicken Soup with Avocado",
        "domain": "cooking",
        "steps": [
            {"index": 1,
             "text": "Pour the Chicken Stock into a large pot and mix in the Onion and Garlic.",
             "entities": ["chicken stock"],
             "resources": ["chicken stock", "onion", "garlic"]},
            {"index": 2,
             "text": "Add the shredded chicken and let everything simmer in the saucepan for ten minutes.",
             "entities": ["simmer", "saucepan"],
             "resources": ["shredded chicken"]},
            {"index": 3,
             "text": "Dice the Avocado and stir it in together with the Heavy Cream.",
             "entities": ["avocado", "heavy cream"],
             "resources": ["avocado", "heavy cream"]},
            {"index": 4,
             "text": "Season with salt and pepper, then whisk briefly to loosen the texture.",
             "entities": ["whisk"],
             "resources": ["salt", "pepper"]},
            {"index": 5,
             "text": "Blend or mix the soup into a smooth mixture. Add the Basil Pesto and stir it through before serving.",
             "entities": ["basil pesto"],
             "resources": ["basil pesto"]},
        ],
    }
    pesto_sidecar = {
        "qa_pairs": {
            "1": [["how much chicken stock do I need?", "Enough Chicken Stock to fill the pot about two-thirds, so the soup can simmer freely."],
                  ["can I use water instead of stock?", "You can, but for Creamy Pesto Chicken Soup with Avocado the Chicken Stock carries most of the flavor."]],
            "2": [["how long does the chicken simmer?", "Let it simmer for ten minutes in step 2, until the chicken is heated through."],
                  ["does the pot need a lid here?", "A saucepan lid helps step 2 along, keeping the simmer steady."]],
            "3": [["how ripe should the avocado be?", "For step 3, a just-ripe Avocado holds its shape better in the warm soup."],
                  ["when does the cream go in?", "Stir the Heavy Cream in right after the diced Avocado in step 3."]],
            "4": [["how much salt should I add?", "Season step 4 to taste; start small, you can always add more salt later."],
                  ["why whisk the soup?", "A brief whisk in step 4 loosens the texture before blending."]],
            "5": [["what is basil pesto?", "Basil Pesto is a sauce made primarily of crushed garlic and fresh basil leaves, blended with olive oil and pine nuts."],
                  ["how smooth should the soup be?", "Blend step 5 until fully smooth, then stir the Basil Pesto through."]],
        },
        "fun_facts": {
            "1": ["Cooks preparing Creamy Pesto Chicken Soup with Avocado note that chicken stock was once sold by pharmacists as a tonic."],
            "2": ["A tidbit for Creamy Pesto Chicken Soup with Avocado: shredding chicken by hand keeps longer fibers than dicing."],
            "3": ["While making Creamy Pesto Chicken Soup with Avocado, many chefs mention the avocado is botanically a berry."],
            "4": ["Fans of Creamy Pesto Chicken Soup with Avocado often point out that whisks were originally bundles of twigs."],
            "5": ["Around Creamy Pesto Chicken Soup with Avocado it is often said that pesto was traditionally pounded in a marble mortar."],
        },
        "definitions": {
            "basil pesto": "Basil Pesto is a sauce made primarily of crushed garlic and fresh basil leaves, blended with olive oil, pine nuts, and hard cheese.",
            "avocado": "An avocado is a creamy green fruit with a single large seed, used in both savory and sweet dishes.",
            "heavy cream": "Heavy cream is the high-fat layer skimmed from fresh milk, thick enough to hold soft peaks when whipped.",
            "chicken stock": "Chicken stock is a savory liquid made by simmering chicken bones and aromatics in water.",
            "saucepan": TOOL_DEFS["saucepan"],
            "whisk": TOOL_DEFS["whisk"],
            "simmer": TOOL_DEFS["simmer"],
        },
        "substitutions": {
            "avocado": SUB_ALTS["avocado"],
            "basil pesto": SUB_ALTS["basil pesto"],
            "chicken stock": SUB_ALTS["chicken stock"],
            "heavy cream": SUB_ALTS["heavy cream"],
        },
        "rare_resources": [],
    }
    return [(salmon, salmon_sidecar), (pesto, pesto_sidecar)]


def generated_cooking_plans(rng: SplitMix64, count: int):
    usage: dict[str, int] = {}
    plans = []
    titles_seen = set()
    style_base = [(s, b) for s in DISH_STYLES for b in DISH_BASES]
    rng.shuffle(style_base)
    for n in range(count):
        style, base = style_base[n]
        available = [p for p in POOL if usage.get(p, 0) < 4 and p in SUB_ALTS]
        rng.shuffle(available)
        feature = available[:4]
        for f in feature:
            usage[f] = usage.get(f, 0) + 1
        title = f"{style} {feature[0].title()} {base}"
        if title in titles_seen:
            title = f"{style} {feature[1].title()} {base}"
        titles_seen.add(title)
        plan_id = slug(title)

        n_steps = 3 + rng.randrange(5)  # 3..7
        shapes = list(STEP_SHAPES)
        rng.shuffle(shapes)
        steps = []
        qa_pairs = {}
        fun_facts = {}
        definitions = {}
        for i in range(1, n_steps + 1):
            shape, slots = shapes[(i - 1) % len(shapes)]
            a = feature[(i - 1) % len(feature)]
            b = feature[i % len(feature)]
            text = (
                shape.replace("{a}", a).replace("{b}", b)
                .replace("{c0}", COMMON[rng.randrange(3)])
                .replace("{c1}", ["salt", "pepper", "sugar"][rng.randrange(3)])
            )
            used_here = [a] if "a" in slots else []
            if "b" in slots:
                used_here.append(b)
            steps.append({
                "index": i,
                "text": text,
                "entities": sorted(set(used_here)),
                "resources": sorted(set(used_here + ([COMMON[0]] if "{c0}" in shape else []))),
            })
            qa_shape_idx = rng.randrange(len(QA_SHAPES))
            q1, ans1 = QA_SHAPES[qa_shape_idx]
            q2, ans2 = QA_SHAPES[(qa_shape_idx + 1 + rng.randrange(len(QA_SHAPES) - 1)) % len(QA_SHAPES)]
            subject = used_here[0] if used_here else a
            qa_pairs[str(i)] = [
                [q1.replace("{i}", str(i)).replace("{a}", subject),
                 ans1.replace("{i}", str(i)).replace("{a}", subject).replace("{title}", title)],
                [q2.replace("{i}", str(i)).replace("{a}", subject),
                 ans2.replace("{i}", str(i)).replace("{a}", subject).replace("{title}", title)],
            ]
            fact_shape = FACT_SHAPES[rng.randrange(len(FACT_SHAPES))]
            fun_facts[str(i)] = [fact_shape.replace("{title}", title).replace("{a}", subject)]
            definitions[subject] = f"{subject.capitalize()} is a distinctive ingredient featured in {title}."
        for term in ("saucepan", "whisk", "colander", "simmer", "saute", "garnish", "marinate"):
            if any(term in s["text"].lower() for s in steps):
                definitions[term] = TOOL_DEFS[term]

        plan = {
            "id": plan_id,
            "title": title,
            "domain": "cooking",
            "steps": steps,
            "all_resources": sorted({r for s in steps for r in s["resources"]}),
        }
        sidecar = {
            "qa_pairs": qa_pairs,
            "fun_facts": fun_facts,
            "definitions": definitions,
            "substitutions": {f: SUB_ALTS[f] for f in feature},
            "rare_resources": [],
        }
        plans.append((plan, sidecar))
    return plans


def diy_plans():
    plans = []
    for title, step_texts, tools in DIY_TASKS:
        plan_id = slug(title)
        steps = []
        qa_pairs = {}
        fun_facts = {}
        definitions = {}
        for i, text in enumerate(step_texts, start=1):
            used_here = sorted({t for t in tools if t in text.lower()})
            steps.append({
                "index": i,
                "text": text,
                "entities": used_here,
                "resources": used_here,
            })
            subject = used_here[0] if used_here else tools[0]
            q, ans = DIY_QA_SHAPES[i % len(DIY_QA_SHAPES)]
            qa_pairs[str(i)] = [[
                q.replace("{i}", str(i)),
                ans.replace("{i}", str(i)).replace("{a}", subject).replace("{title}", title),
            ]]
            fact = DIY_FACT_SHAPES[i % len(DIY_FACT_SHAPES)]
            fun_facts[str(i)] = [fact.replace("{title}", title).replace("{a}", subject)]
            definitions[subject] = f"A {subject} is a basic workshop item used while completing {title.lower()}."
        for term in ("stud finder", "countersink", "pilot hole", "wooden spoon"):
            if any(term in s["text"].lower() for s in steps):
                definitions[term] = TOOL_DEFS[term]
        plan = {
            "id": plan_id,
            "title": title,
            "domain": "diy",
            "steps": steps,
            "all_resources": sorted({r for s in steps for r in s["resources"]}),
        }
        sidecar = {
            "qa_pairs": qa_pairs,
            "fun_facts": fun_facts,
            "definitions": definitions,
            "substitutions": {t: SUB_ALTS[t] for t in tools if t in SUB_ALTS},
            "rare_resources": [],
        }
        plans.append((plan, sidecar))
    return plans


EXPLORE = ["Question", "GetFunFact", "DefinitionQuestion", "Replacement", "ChitChat", "Fallback", "Safety"]
EXPLORE_W = [30, 18, 12, 14, 16, 7, 3]


def make_sessions(rng: SplitMix64, n_sessions: int):
    sessions = []
    for s in range(n_sessions):
        seq = ["NextStep"]
        n_steps = 5 + rng.randrange(5)
        for _ in range(n_steps):
            if rng.random() < 0.10:
                seq.append(["Repeat", "PreviousStep"][rng.randrange(2)])
            if rng.random() < 0.55:
                seq.append(rng.weighted_choice(EXPLORE, EXPLORE_W))
                if rng.random() < 0.30:
                    seq.append(rng.weighted_choice(EXPLORE, EXPLORE_W))
            seq.append("NextStep")
        roll = rng.random()
        if roll < 0.55:
            seq.append("CompleteTask")
        elif roll < 0.62:
            seq.append("NewTask")
        elif roll < 0.90:
            seq.append("ChitChat")  # thanks, then the user just leaves
        sessions.append({"session": f"s{s:04d}", "intents": seq})
    # A few crafted sessions so every intent is guaranteed to appear.
    sessions.append({"session": "crafted-0", "intents": [
        "NextStep", "Question", "NextStep", "Replacement", "PreviousStep", "Repeat",
        "NextStep", "GetFunFact", "NextStep", "DefinitionQuestion", "CompleteTask"]})
    sessions.append({"session": "crafted-1", "intents": [
        "NextStep", "Safety", "NextStep", "Fallback", "NextStep", "ChitChat", "NewTask"]})
    return sessions


def main():
    plans_dir = DATA / "plans"
    sidecars_dir = DATA / "sidecars"
    plans_dir.mkdir(parents=True, exist_ok=True)
    sidecars_dir.mkdir(parents=True, exist_ok=True)
    for stale in list(plans_dir.glob("*.json")) + list(sidecars_dir.glob("*.json")):
        stale.unlink()

    rng = SplitMix64(derive_seed(SEED, "plans"))
    everything = handcrafted_plans() + generated_cooking_plans(rng, 53) + diy_plans()
    for plan, sidecar in everything:
        (plans_dir / f"{plan['id']}.json").write_text(
            json.dumps(plan, sort_keys=True, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
        )
        (sidecars_dir / f"{plan['id']}.json").write_text(
            json.dumps(sidecar, sort_keys=True, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
        )
    print(f"wrote {len(everything)} plans + sidecars")

    subs_lines = []
    for resource in sorted(SUB_ALTS):
        for alt in SUB_ALTS[resource]:
            subs_lines.append(f"{resource}\t{alt}")
    (DATA / "substitutions.tsv").write_text("\n".join(subs_lines) + "\n", encoding="utf-8")
    print(f"wrote substitution DB with {len(SUB_ALTS)} resources")

    log_rng = SplitMix64(derive_seed(SEED, "logs"))
    sessions = make_sessions(log_rng, 160)
    with open(DATA / "interaction_logs.jsonl", "w", encoding="utf-8") as fh:
        for session in sessions:
            fh.write(json.dumps(session, sort_keys=True, ensure_ascii=False) + "\n")
    print(f"wrote {len(sessions)} annotated interactions")


if __name__ == "__main__":
    main()
