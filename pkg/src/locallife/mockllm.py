"""Deterministic response rules for mock endpoints.

Resolution order for an unscripted request: canonical-agent echoes (only
under the ``agent_echo`` fallback), then the hash-derived option letter for
multiple-choice prompts, then a generic deterministic acknowledgement.  The
echo rules recognize the prompt catalog's fixed phrasing and rebuild
structurally valid output from the inputs embedded in the prompt, so every
pipeline can run end to end without a network.
"""

from __future__ import annotations

import json
import re

from .gateway import ChatRequest, MockScript

_OPTION_LINE_RE = re.compile(r"^\s*([A-T])[.)]\s+", re.MULTILINE)

_TEMPLATE_OPENERS = (
    "Describe the", "What do we know about the", "Introduce the", "Summarize the",
    "Give details for the", "Explain the", "Present the", "Outline the",
    "Profile the", "Characterize the", "Walk me through the", "Sketch the",
)

_REVIEW_DIMS_SCALED = (
    "in_depth_content", "actionable_suggestions", "natural_colloquial",
    "credible_engaging", "overall_usefulness",
)
_REVIEW_DIMS_BINARY = ("non_promotional", "non_ai_generated")


def resolve_mock_text(request: ChatRequest, fingerprint: str, script: MockScript) -> str:
    if fingerprint in script.fixtures:
        return script.fixtures[fingerprint]
    content = "\n\n".join(m.content for m in request.messages)
    if script.fallback == "agent_echo":
        echoed = _agent_echo(content, fingerprint)
        if echoed is not None:
            return echoed
    letter = _option_letter(content, fingerprint)
    if letter is not None:
        return letter
    return f"ok ({fingerprint[:12]})"


def _option_letter(content: str, fingerprint: str) -> str | None:
    """Hash-derived letter for the last contiguous A., B., ... option block."""
    lines = content.splitlines()
    groups: list[list[str]] = []
    current: list[str] = []
    for line in lines:
        match = _OPTION_LINE_RE.match(line)
        if match:
            current.append(match.group(1))
        elif current:
            groups.append(current)
            current = []
    if current:
        groups.append(current)
    for letters in reversed(groups):
        expected = [chr(ord("A") + i) for i in range(len(letters))]
        if len(letters) >= 2 and letters == expected:
            n = len(letters)
            return chr(ord("A") + int(fingerprint[:16], 16) % n)
    if "Answer with the letter" in content:
        return "A"
    return None


def _agent_echo(content: str, fingerprint: str) -> str | None:
    ref = fingerprint[:8]
    if "question-answer templates" in content:
        return _echo_templates(content)
    if "first person as the merchant" in content:
        return _echo_merchant(content, ref)
    if "first person as the platform user" in content:
        return _echo_user(content, ref)
    if "simulated dialogue" in content:
        return _echo_interaction(content, ref)
    if "write the single question" in content:
        return f"Which business or experience does this text describe, and why does it fit its category? ({ref})"
    if "Convert the record below" in content:
        return _echo_single_llm(content, ref)
    if "short function tags" in content:
        return _echo_tags(content)
    if "likely search queries" in content:
        return _echo_queries(content)
    if "Rate the review below" in content:
        return _echo_review_scores(fingerprint)
    if "Aggregate behavior of similar users:" in content:
        return f"Similar users show consistent patterns across contexts ({ref})."
    if "Earlier analysis:" in content and "Answer with the letter" not in content:
        return f"The earlier analysis narrows the plausible intent further ({ref})."
    return None


def _input_block(content: str, header: str = "Input information:") -> dict[str, str]:
    values: dict[str, str] = {}
    if header not in content:
        return values
    block = content.split(header, 1)[1]
    last_key: str | None = None
    for line in block.splitlines():
        if not line.strip():
            if values:
                break
            continue
        if ": " in line:
            key, value = line.split(": ", 1)
            values[key.strip()] = value
            last_key = key.strip()
        elif last_key is not None:
            values[last_key] += "\n" + line
    return values


def _echo_templates(content: str) -> str:
    kind_match = re.search(r"^Entity kind: (.+)$", content, re.MULTILINE)
    fields_match = re.search(r"^Fields: (.+)$", content, re.MULTILINE)
    count_match = re.search(r"Create (\d+)", content)
    kind = kind_match.group(1).strip() if kind_match else "entity"
    fields = [f.strip() for f in (fields_match.group(1).split(",") if fields_match else [])]
    fields = [f for f in fields if f]
    if not fields:
        fields = ["name"]
    count = int(count_match.group(1)) if count_match else 10
    templates = []
    for i in range(count + 2):
        opener = _TEMPLATE_OPENERS[i % len(_TEMPLATE_OPENERS)]
        lead = ", ".join(f"{name} {{{name}}}" for name in fields[:-1]) or f"{fields[0]} {{{fields[0]}}}"
        instruction = f"{opener} {kind} with {lead}. What about its {fields[-1]}? (v{i + 1})"
        output = f"Its {fields[-1]} is {{{fields[-1]}}}."
        templates.append({"instruction": instruction, "output": output})
    return json.dumps(templates, ensure_ascii=False)


def _with_leftovers(text: str, values: dict[str, str]) -> str:
    missing = [v for v in values.values() if v not in text]
    if missing:
        text += " Context on file: " + "; ".join(missing) + "."
    return text


def _echo_merchant(content: str, ref: str) -> str:
    values = _input_block(content)
    name = values.get("name", "this merchant")
    intro = values.get("introduction", "a local business")
    category = values.get("category", "local services")
    text = (
        f"I am {name}, {intro}. I belong to {category} because that is exactly "
        f"what my offering serves ({ref})."
    )
    return _with_leftovers(text, values)


def _echo_user(content: str, ref: str) -> str:
    values = _input_block(content)
    profile = values.get("profile", "an everyday customer")
    merchant = values.get("merchant", "a nearby place")
    when = values.get("time", "some point")
    where = values.get("location", "the neighborhood")
    text = (
        f"I am a user with profile {profile}. I went to {merchant} at {when} at {where}, "
        f"because it matched what I usually look for ({ref})."
    )
    return _with_leftovers(text, values)


def _echo_interaction(content: str, ref: str) -> str:
    values = _input_block(content)
    profile = values.get("user_profile", "an everyday customer")
    name = values.get("name", "the merchant")
    category = values.get("category", "local services")
    text = (
        f'In a typical {category} scenario, a user says: "I am looking for {category}; '
        f'my profile is {profile}." The merchant replies: "Welcome to {name}." '
        f"The conversation continues until the user agrees, leading to a successful "
        f"transaction ({ref})."
    )
    return _with_leftovers(text, values)


def _echo_single_llm(content: str, ref: str) -> str:
    record = ""
    if "Record:\n" in content:
        block = content.split("Record:\n", 1)[1]
        record = block.split("\n\nRespond", 1)[0].strip()
    pair = {
        "instruction": f"Restate the information in this platform record ({ref}).",
        "output": record or f"(empty record {ref})",
    }
    return json.dumps([pair], ensure_ascii=False)


def _echo_tags(content: str) -> str:
    values = _input_block(content)
    category = values.get("category", "local visits")
    return f"suitable for family outing; good for {category} plans; quick service stop"


def _echo_queries(content: str) -> str:
    values = _input_block(content)
    name = values.get("name", "local shop").lower()
    category = values.get("category", "services").lower()
    return "\n".join([name, f"{category} near me", f"best {category} nearby"])


def _echo_review_scores(fingerprint: str) -> str:
    seed = int(fingerprint[:16], 16)
    lines = []
    for i, dim in enumerate(_REVIEW_DIMS_SCALED):
        lines.append(f"{dim}: {(seed >> (4 * i)) % 6}")
    for i, dim in enumerate(_REVIEW_DIMS_BINARY):
        lines.append(f"{dim}: {(seed >> (4 * (i + 5))) % 2}")
    return "\n".join(lines)
