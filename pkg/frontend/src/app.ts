// Entry point: wires the session screen and rating form into the page.
// Query parameters: ?base=http://127.0.0.1:8787&session=<id> resumes an
// existing session; without `session`, a small launcher form opens one.

import { ApiClient, SessionView } from "./api.js";
import { RatingForm } from "./rating-form.js";
import { SessionScreen } from "./session-view.js";

export function mountSession(root: HTMLElement, client: ApiClient,
                             view: SessionView): SessionScreen {
  const doc = root.ownerDocument;
  const sessionRoot = doc.createElement("div");
  sessionRoot.className = "session-root";
  const ratingRoot = doc.createElement("div");
  ratingRoot.className = "rating-root";
  root.append(sessionRoot, ratingRoot);

  const screen = new SessionScreen(sessionRoot, client, view, {
    onFinalized: () => {
      new RatingForm(ratingRoot, client, screen.view);
    },
  });
  if (view.state === "Finalized") {
    new RatingForm(ratingRoot, client, view);
  }
  return screen;
}

async function launcher(root: HTMLElement, client: ApiClient): Promise<void> {
  const doc = root.ownerDocument;
  const form = doc.createElement("form");
  form.className = "launcher";
  form.innerHTML = `
    <h2>Open an annotation session</h2>
    <label>Dataset <select name="dataset"></select></label>
    <label>Annotator id <input name="annotator_id" value="annotator"></label>
    <label>Mode
      <select name="mode">
        <option>GroundTruth</option>
        <option>QualityAssessment</option>
      </select>
    </label>
    <button type="submit">Open session</button>
    <div class="launcher-error"></div>`;
  root.append(form);

  const select = form.querySelector('select[name="dataset"]') as HTMLSelectElement;
  for (const ds of await client.listDatasets()) {
    const option = doc.createElement("option");
    option.value = ds.name;
    option.textContent = `${ds.name} (${ds.tweets} tweets, budget ${ds.summary_budget})`;
    select.append(option);
  }

  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    const data = new FormData(form);
    try {
      const view = await client.openSession({
        dataset: String(data.get("dataset")),
        annotator_id: String(data.get("annotator_id")),
        mode: String(data.get("mode")),
      });
      const url = new URL(doc.defaultView!.location.href);
      url.searchParams.set("session", view.session_id);
      doc.defaultView!.history.replaceState(null, "", url);
      root.textContent = "";
      mountSession(root, client, view);
    } catch (err) {
      (form.querySelector(".launcher-error") as HTMLElement).textContent =
        err instanceof Error ? err.message : String(err);
    }
  });
}

export async function main(doc: Document): Promise<void> {
  const root = doc.getElementById("app");
  if (!root) throw new Error("missing #app element");
  const params = new URLSearchParams(doc.defaultView!.location.search);
  const base = params.get("base") ?? "http://127.0.0.1:8787";
  const client = new ApiClient(base);
  const sessionId = params.get("session");
  if (sessionId) {
    mountSession(root, client, await client.getSession(sessionId));
  } else {
    await launcher(root, client);
  }
}

declare global {
  interface Window {
    __crisissummBooted?: boolean;
  }
}

if (typeof window !== "undefined" && typeof document !== "undefined" &&
    document.getElementById("app") && !window.__crisissummBooted) {
  window.__crisissummBooted = true;
  void main(document);
}
