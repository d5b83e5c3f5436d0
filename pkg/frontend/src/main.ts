// Entry point: wires the store to the DOM and the event stream.

import { ApiClient } from "./api.js";
import { renderComparison, renderMaps, type MapToggles } from "./render.js";
import { AppStore } from "./store.js";

const params = new URLSearchParams(window.location.search);
const base = params.get("server") ?? window.location.origin;
const sessionId = params.get("session") ?? "default";

const api = new ApiClient(base, sessionId);
const store = new AppStore(api);

const compareRoot = document.getElementById("compare")!;
const mapsRoot = document.getElementById("maps")!;
const toggles: MapToggles = { topK: false, bottomK: false, k: 25 };

store.subscribe(() => {
  renderComparison(store, compareRoot);
  renderMaps(store, mapsRoot, toggles);
});

for (const [id, key] of [
  ["toggle-topk", "topK"],
  ["toggle-bottomk", "bottomK"],
] as const) {
  document.getElementById(id)?.addEventListener("change", (ev) => {
    toggles[key] = (ev.target as HTMLInputElement).checked;
    renderMaps(store, mapsRoot, toggles);
  });
}
document.getElementById("toggle-blind")?.addEventListener("change", (ev) => {
  store.setBlindMode((ev.target as HTMLInputElement).checked);
});

function connect(): void {
  api.connectEvents(
    (url) => new WebSocket(url) as unknown as import("./api.js").SocketLike,
    (event) => void store.onEvent(event),
    () => {
      // reconnect contract: resync via state, then resubscribe
      setTimeout(() => {
        void store.refresh().then(connect);
      }, 500);
    },
    store.state.lastEventSeq,
  );
}

void store.refresh().then(connect);
