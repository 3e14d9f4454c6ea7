// @vitest-environment happy-dom
import { beforeEach, describe, expect, it } from "vitest";

import { initialModel, onFrame, onOpen } from "../src/model.js";
import { Frame, StateSnapshot } from "../src/protocol.js";
import { bindControls, buildSkeleton, render } from "../src/view.js";

const CATEGORIES: Record<string, string[]> = {
  Vocalization: ["Crying", "Fussing", "Babbling", "Laughing", "Cooing", "Vegetative"],
  SocialCommunicativeGesture: [
    "Waving", "Pointing", "Reaching", "Signs", "ProtoSigns", "CopySign", "GazeToParent",
  ],
  SocialRoutine: ["Attention", "PeekabooResponse", "HelloResponse", "ByeResponse", "SmilingAtAgent"],
  SocialManualAction: ["Clapping", "BangingSurface", "GrabbingObject", "HandsToMouth", "Yawning"],
};
const ALL_LABELS = Object.values(CATEGORIES).flat();

function hello(): Frame {
  return {
    v: 1,
    kind: "hello",
    payload: { schema: 1, scenario: "demo", labels: ALL_LABELS, categories: CATEGORIES },
  };
}

function snapshot(overrides: Partial<StateSnapshot> = {}): StateSnapshot {
  return {
    clock: 21000,
    aoi: "Avatar",
    fixated: true,
    readiness: "VeryPositive",
    rhyme_unit: null,
    last_behavior: { t: 20000, label: "Attention", category: "SocialRoutine", origin: "scripted" },
    behavior_pending: false,
    avatar: { status: "Executing", behavior: "Boat" },
    robot: { status: "Idle", behavior: "" },
    active_plan: {
      id: "plan-4",
      provenance: "engaged_avatar_parasympathetic",
      episode: "NurseryRhyme",
      rhyme: "Boat",
      cursor: 8,
      steps: [{ agent: "Avatar", behavior: "Boat", target: "Baby" }],
      terminal: [false],
    },
    episode: "NurseryRhyme",
    episode_rhyme: "Boat",
    parent_joined: false,
    timers: [],
    rhyme_rotation: 1,
    ...overrides,
  };
}

function stateFrame(state: StateSnapshot): Frame {
  return {
    v: 1,
    kind: "event",
    topic: "dm.state",
    payload: { t: state.clock, seq: 1, source: "dm", payload: { kind: "state_snapshot", state } },
  };
}

let root: HTMLElement;

beforeEach(() => {
  document.body.innerHTML = '<div id="app"></div>';
  root = document.getElementById("app")!;
  buildSkeleton(root);
});

describe("button grid", () => {
  it("renders exactly the 23 canonical labels grouped by category", () => {
    const model = initialModel();
    onOpen(model);
    onFrame(model, hello());
    render(model, root);
    const buttons = root.querySelectorAll("#button-grid button");
    expect(buttons.length).toBe(23);
    const legends = [...root.querySelectorAll("#button-grid legend")].map((l) => l.textContent);
    expect(legends).toEqual(Object.keys(CATEGORIES));
    for (const category of Object.keys(CATEGORIES)) {
      const fieldset = [...root.querySelectorAll("#button-grid fieldset")].find(
        (f) => f.querySelector("legend")?.textContent === category,
      )!;
      const labels = [...fieldset.querySelectorAll("button")].map((b) => b.dataset.label);
      expect(labels).toEqual(CATEGORIES[category]);
    }
  });

  it("buttons are disabled until connected", () => {
    const model = initialModel();
    onFrame(model, hello()); // catalog known but not connected yet
    model.connection = "connecting";
    render(model, root);
    const buttons = [...root.querySelectorAll<HTMLButtonElement>("#button-grid button")];
    expect(buttons.length).toBe(23);
    expect(buttons.every((b) => b.disabled)).toBe(true);
  });

  it("clicks are delivered with the button's label", () => {
    const model = initialModel();
    onOpen(model);
    onFrame(model, hello());
    render(model, root);
    const clicked: string[] = [];
    bindControls(root, { onBehavior: (l) => clicked.push(l), onParentToggle: () => {} });
    (root.querySelector('button[data-label="Waving"]') as HTMLButtonElement).click();
    (root.querySelector('button[data-label="Pointing"]') as HTMLButtonElement).click();
    expect(clicked).toEqual(["Waving", "Pointing"]);
  });
});

describe("state panel", () => {
  it("shows the rhyme name and current sign unit during a nursery rhyme", () => {
    const model = initialModel();
    onOpen(model);
    onFrame(model, hello());
    onFrame(
      model,
      stateFrame(
        snapshot({
          rhyme_unit: { rhyme: "Boat", index: 1, total: 3, gloss: "BOAT-on-WATER", prime: "/B/" },
        }),
      ),
    );
    render(model, root);
    const panel = root.querySelector("#state-panel")!.textContent!;
    expect(panel).toContain("NurseryRhyme · Boat");
    expect(panel).toContain("BOAT-on-WATER");
    expect(panel).toContain("2/3");
    expect(panel).toContain("engaged_avatar_parasympathetic");
  });

  it("a malformed frame leaves the previous state on screen", () => {
    const model = initialModel();
    onOpen(model);
    onFrame(model, hello());
    onFrame(model, stateFrame(snapshot()));
    render(model, root);
    const before = root.querySelector("#state-fields")!.textContent;
    // Malformed payloads never become frames; the model is untouched.
    onFrame(model, {
      v: 1,
      kind: "error",
      payload: { code: "MalformedFrame", message: "frame is not JSON" },
    });
    render(model, root);
    expect(root.querySelector("#state-fields")!.textContent).toBe(before);
    expect(root.querySelector<HTMLElement>("#banner")!.hidden).toBe(false);
  });

  it("a burst of 50 frames renders the final state", () => {
    const model = initialModel();
    onOpen(model);
    onFrame(model, hello());
    for (let i = 0; i < 50; i++) {
      onFrame(model, stateFrame(snapshot({ clock: i * 500, aoi: i === 49 ? "Robot" : "Avatar" })));
    }
    render(model, root);
    const panel = root.querySelector("#state-panel")!.textContent!;
    expect(panel).toContain("Robot");
    expect(root.querySelector("#clock")!.textContent).toContain("24.5");
  });

  it("processes and renders a state frame well inside the 200 ms budget", () => {
    const model = initialModel();
    onOpen(model);
    onFrame(model, hello());
    const t0 = performance.now();
    onFrame(model, stateFrame(snapshot()));
    render(model, root);
    const elapsed = performance.now() - t0;
    expect(elapsed).toBeLessThan(200);
  });
});
