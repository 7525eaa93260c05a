"""Prompt templates for every model-facing step.

Templates are plain strings with ``{slot}`` placeholders filled by the
``build_*`` helpers; images travel separately as message parts.  The texts
are load-bearing: downstream parsers key on the exact output contracts
stated here (the "Next State Reasoning:"/"HTML:" markers, the
Thoughts/Status JSON map, the numbered alternatives map, "Best: <n>", and
the Reason/Judgement/Confidence JSON), so edit with the parsers in view.
"""

from __future__ import annotations

from .actions import CanonicalAction, action_prompt_text

__all__ = [
    "IMG_TO_CODE",
    "LOOK_AHEAD",
    "NEXT_STATE",
    "JUDGE",
    "ALTERNATIVES",
    "SELECT",
    "VALUE_CURRENT",
    "VALUE_PREDICTED",
    "build_img_to_code",
    "build_look_ahead",
    "build_next_state",
    "build_judge",
    "build_alternatives",
    "build_select",
    "build_value_current",
    "build_value_predicted",
    "format_history",
    "format_candidates",
]

IMG_TO_CODE = """\
You are an expert mobile UI developer. Given a screenshot of a mobile interface, you must first analyze it and then generate clean, responsive HTML code.

Your task has TWO steps:
1. REASONING: Analyze the screenshot and plan the HTML structure.
2. HTML GENERATION: Create the HTML code based on your analysis.

Focus on these two critical criteria:
1. Each button's function should be "inferable" / "differentiable" - users must be able to understand what each button does.
2. Each text content should be well-represented in the HTML output - all visible text must be accurately captured.

In your REASONING, address:
- The overall structure and layout of the screen (header, main content, footer, etc.)
- Important UI elements and their hierarchy (buttons, text, images, icons, etc.)
- Which parts of the screen are most important for functionality
- How to ensure buttons are clearly differentiated and their functions are inferable
- How to accurately represent all text content
- Color scheme and visual styling that supports clarity
- Any interactive elements and their purposes

Requirements for HTML:
1. Generate complete, valid HTML5 code.
2. Choose between using inline CSS and utility classes from Bootstrap, Tailwind CSS, or MUI for styling.
3. Use mobile-first design principles matching screenshot dimensions.
4. For images, use inline SVG placeholders with explicit width and height.
5. Make it visually as close to the provided screenshot.
6. Each button's function must be "inferable" / "differentiable".
7. All text content from the screenshot must be well-represented.

Return ONLY a JSON object with this exact structure:
{{
    "reasoning": "Your detailed analysis and planning here",
    "html": "Your complete HTML code here"
}}
"""

LOOK_AHEAD = """\
You are a GUI Agent.

Action: {action}

You are given a current screenshot state (first image), action and the next state (second image).
Action is also visually annotated in the first image
1. Clicks: Red circle with crosshair + yellow center dot
2. Scrolls: Blue line with green start point + red end point or based on direction

Generate reasoning on what this next state would look like as if you were only given the current screenshot.
Focus only on the changes that can be predicted from the current screenshots.
In the reasoning, do not mention the visual annotation of the action or the existence of the ground truth next state.
Only generate the reasoning, nothing else.
"""

NEXT_STATE = """\
You are an expert mobile UI World Model that can accurately predict the next state given an action. Given a screenshot of a mobile interface and an action, you must generate clean, responsive HTML code that represents the state of the interface AFTER the action is performed. First generate reasoning about what the next state should look like based on the action. Afterwards, generate the HTML code representing the next state that logically follows the action. You will render this HTML in a mobile viewport to see how similar it looks and acts like the mobile screenshot.

Requirements:
1. Provide reasoning about what the next state should look like based on the action
2. Generate complete, valid HTML5 code
3. Choose between using inline CSS and utility classes from Bootstrap, Tailwind CSS, or MUI for styling, depending on which option generates the closest code to the screenshot.
4. Use mobile-first design principles matching screenshot dimensions.
5. For images, use inline SVG placeholders with explicit width and height attributes that match the approximate dimensions from the screenshot. Matching the approximate color is also good.
6. Use modern web standards and best practices
7. Return ONLY the HTML code, no explanations or markdown formatting
8. The generated HTML should render properly in a mobile viewport.
9. Generated HTML should look like the screen that logically follows the current screen and the action.

Action: {action}

Output format:

Next State Reasoning: <your reasoning about what the next state should look like>

HTML: <valid_html_code>

Generate the next state reasoning and the next state in html:
"""

JUDGE = """\
You are an expert in evaluating the performance of a mobile emulator. The mobile emulator is designed to navigate the UI change based on human instruction.

Inputs:
Current UI Screenshot: The present state of the cellphone's user interface.
Next UI Screenshot: The mobile emulator generated UI indicating the next state of the cellphone's user interface based on human instruction.
Human instruction: The action applied on the current UI screenshot.

Your goal is to determine whether the mobile emulator successfully predicts the next UI image with current information and layout based on the current UI and the user action.

Consider these aspects:
- Does the generated UI show a plausible result of applying the action?
- Is the layout and structure consistent with what would happen after the action?
- Are interactive elements (buttons, inputs, etc.) in expected states?
- Does the content reflect the expected changes from the action?

Human instruction: {action}

IMPORTANT
Format your response into a JSON map as shown below:
{{
    "Thoughts": "<your thoughts and reasoning process>",
    "Status": "success" or "failure"
}}
"""

_ACTION_TYPES_CORE = """\
- TAP: Tap on a location. Format: {{"action_type": "TAP", "x": <x>, "y": <y>}}
- SCROLL: Scroll in a direction. Format: {{"action_type": "SCROLL", "direction": "<up|down|left|right>"}}
- TYPE: Type text. Format: {{"action_type": "TYPE", "text": "<text>"}}
- BACK: Press back button. Format: {{"action_type": "BACK"}}
- HOME: Press home button. Format: {{"action_type": "HOME"}}
- ENTER: Press enter key. Format: {{"action_type": "ENTER"}}
- LONG_PRESS: Long press on a location. Format: {{"action_type": "LONG_PRESS", "x": <x>, "y": <y>}}"""

_ACTION_TYPES_WITH_OPEN_APP = _ACTION_TYPES_CORE + """
- OPEN_APP: Open an app. Format: {{"action_type": "OPEN_APP", "app_name": "<name>"}}"""

ALTERNATIVES = """\
You are an AI agent that can operate an Android phone. Given a goal and the current screenshot, suggest alternative actions that could be taken.

Goal: {goal}
Previous actions: {history}
The following action has already been suggested (DO NOT repeat this action): {gt_action}

Available action types:
""" + _ACTION_TYPES_CORE + """

Coordinates are in range [0, 1000] where (0,0) is top-left and (1000,1000) is bottom-right.

Suggest {num_alternatives} DIFFERENT alternative actions that could also make progress toward the goal.

Critical requirements:
1. Each alternative MUST be a completely different action from the one already suggested above.
2. Do NOT repeat or slightly modify the already-suggested action (e.g., if the suggested action is a TAP at (500, 300), do NOT suggest a TAP at (500, 301) or nearby coordinates).
3. For TAP actions, choose DIFFERENT UI elements to tap, not the same element with slightly different coordinates.
4. Each alternative should represent a meaningfully different approach to achieving the goal.

For each action, explain the reasoning behind it.

You must output exactly {num_alternatives} actions numbered 1 to {num_alternatives}:

{{1: {{Reason: ..., Action: {{"action_type":...}}}}, ..., {num_alternatives}: {{Reason: ..., Action: {{"action_type":...}}}}}}
"""

SELECT = """\
You are an AI agent that can operate an Android phone. Given a goal and the current screenshot, select the best action from the candidates below.

Goal: {goal}
Previous actions: {history}
Candidate actions: {candidates}

Available action types:
""" + _ACTION_TYPES_CORE + """

Coordinates are in range [0, 1000] where (0,0) is top-left and (1000,1000) is bottom-right.

Analyze each candidate action carefully based on the screenshot and goal. Select the candidate most likely to help achieve the goal.

Output format:
Reason: <your analysis of why this candidate is best>
Best: <candidate number>
"""

# <TASK> and <CRITERIA> are spliced in with str.replace so the literal JSON
# braces stay doubled for the single build-time .format pass.
_VALUE_TAIL = """
Coordinates are in range [0, 1000] where (0,0) is top-left and (1000,1000) is bottom-right.

<TASK>

<CRITERIA>

Respond in JSON format:
{{"Reason": "Your explanation", "Judgement": "valid" or "invalid", "Confidence": <score>}}

IMPORTANT: Use the FULL range of confidence scores to differentiate action quality:
- 0.9-1.0: Clearly the optimal action, directly advances the goal
- 0.7-0.8: Good action, makes progress but may not be the most efficient path
- 0.5-0.6: Acceptable action, loosely related to goal but indirect
- 0.3-0.4: Weak action, unlikely to help but not harmful
- 0.1-0.2: Poor action, probably wrong target or type

Avoid defaulting to 1.0 or 0.9 unless the action is clearly optimal. Be critical and discriminating.
"""

VALUE_CURRENT = ("""\
You are an AI agent evaluating whether an action will help achieve a goal on an Android phone.

Goal: {goal}
Previous actions: {history}
The action being evaluated: {action}
Reason for this action: {reason}

You are given the CURRENT screenshot showing the UI state before the action.

Available action types:
""" + _ACTION_TYPES_WITH_OPEN_APP + _VALUE_TAIL).replace(
    "<TASK>",
    "Your task is to judge whether the action is a reasonable step toward achieving the goal based on the current UI state.",
).replace(
    "<CRITERIA>",
    """Evaluate based on these criteria:
1. Does the action target the correct UI element or area visible on screen?
2. Is the action type appropriate for the current context?
3. How directly does this action advance the goal vs. being a roundabout step?""",
)

VALUE_PREDICTED = ("""\
You are an AI agent evaluating whether a predicted action will help achieve a goal on an Android phone.

Goal: {goal}
Previous actions: {history}
The action being evaluated: {action}
Reason for this action: {reason}

You will be given two screenshots:
1. BEFORE screenshot: The current UI state before the action
2. AFTER screenshot: The predicted UI state after performing the action

Available action types:
""" + _ACTION_TYPES_WITH_OPEN_APP + _VALUE_TAIL).replace(
    "<TASK>",
    "Your task is to judge whether the action is a reasonable step toward achieving the goal.",
).replace(
    "<CRITERIA>",
    'Evaluate based on this criterion: Does the predicted "after" screenshot show expected progress toward the goal?',
)


def format_history(history: list[str] | None) -> str:
    """Compact one-line rendering of previous actions for the {history} slot."""
    if not history:
        return "None"
    return "; ".join(f"{i}. {h}" for i, h in enumerate(history, 1))


def format_candidates(candidates: list[tuple[CanonicalAction, str]]) -> str:
    """Numbered candidate list (1-based) for the {candidates} slot."""
    lines = []
    for i, (action, reason) in enumerate(candidates, 1):
        lines.append(f"{i}. {action_prompt_text(action)} (Reason: {reason})")
    return "\n".join(lines)


def build_img_to_code() -> str:
    return IMG_TO_CODE.format()


def build_look_ahead(action: CanonicalAction) -> str:
    return LOOK_AHEAD.format(action=action_prompt_text(action))


def build_next_state(action: CanonicalAction) -> str:
    return NEXT_STATE.format(action=action_prompt_text(action))


def build_judge(action: CanonicalAction) -> str:
    return JUDGE.format(action=action_prompt_text(action))


def build_alternatives(
    goal: str,
    history: list[str] | None,
    gt_action: CanonicalAction,
    num_alternatives: int,
) -> str:
    return ALTERNATIVES.format(
        goal=goal,
        history=format_history(history),
        gt_action=action_prompt_text(gt_action),
        num_alternatives=num_alternatives,
    )


def build_select(
    goal: str,
    history: list[str] | None,
    candidates: list[tuple[CanonicalAction, str]],
) -> str:
    return SELECT.format(
        goal=goal,
        history=format_history(history),
        candidates="\n" + format_candidates(candidates),
    )


def _build_value(
    template: str,
    goal: str,
    history: list[str] | None,
    action: CanonicalAction,
    reason: str,
) -> str:
    return template.format(
        goal=goal,
        history=format_history(history),
        action=action_prompt_text(action),
        reason=reason,
    )


def build_value_current(goal: str, history: list[str] | None, action: CanonicalAction, reason: str) -> str:
    return _build_value(VALUE_CURRENT, goal, history, action, reason)


def build_value_predicted(goal: str, history: list[str] | None, action: CanonicalAction, reason: str) -> str:
    return _build_value(VALUE_PREDICTED, goal, history, action, reason)
