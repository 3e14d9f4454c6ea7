// Bootstrap: connect to the gateway, keep the model current, render at
// most once per animation frame.

import { GatewayClient } from "./client.js";
import {
  clickBehavior,
  initialModel,
  onClose,
  onFrame,
  onOpen,
  toggleParent,
} from "./model.js";
import { bindControls, buildSkeleton, render } from "./view.js";

const params = new URLSearchParams(window.location.search);
const url =
  params.get("gateway") ??
  `ws://${window.location.hostname || "127.0.0.1"}:8765`;

const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");

const model = initialModel();
buildSkeleton(root);

let renderQueued = false;
function scheduleRender(): void {
  if (renderQueued) return;
  renderQueued = true;
  requestAnimationFrame(() => {
    renderQueued = false;
    render(model, root!);
  });
}

const client = new GatewayClient(
  () => new WebSocket(url) as unknown as import("./client.js").SocketLike,
  {
    onOpen() {
      client.sendAll(onOpen(model));
      scheduleRender();
    },
    onFrame(frame) {
      onFrame(model, frame);
      scheduleRender();
    },
    onClose() {
      onClose(model);
      scheduleRender();
    },
  },
);

bindControls(root, {
  onBehavior(label) {
    client.sendAll(clickBehavior(model, label));
    scheduleRender();
  },
  onParentToggle(joined) {
    client.sendAll(toggleParent(model, joined));
    scheduleRender();
  },
});

client.connect();
scheduleRender();
