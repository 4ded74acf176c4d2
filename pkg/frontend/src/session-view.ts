// Session screen: topic tabs, candidate lists (text only, rendered in the
// server-provided order), the selection basket, and finalize. Toggles are
// optimistic: the basket updates immediately and rolls back if the server
// rejects the change.

import { ApiClient, ApiError, SessionView, SummaryRecord } from "./api.js";
import { INSTRUCTIONS, TOPIC_DESCRIPTIONS } from "./guidelines.js";

export interface SessionCallbacks {
  onFinalized?: (record: SummaryRecord) => void;
}

export class SessionScreen {
  view: SessionView;
  activeTopic: string;

  private root: HTMLElement;
  private client: ApiClient;
  private callbacks: SessionCallbacks;
  private doc: Document;

  constructor(root: HTMLElement, client: ApiClient, view: SessionView,
              callbacks: SessionCallbacks = {}) {
    this.root = root;
    this.client = client;
    this.view = view;
    this.callbacks = callbacks;
    this.doc = root.ownerDocument;
    this.activeTopic = Object.keys(view.candidates)[0] ?? "";
    this.render();
  }

  selectedCount(): number {
    return this.view.order.length;
  }

  isSelected(topic: string, tweetId: string): boolean {
    return (this.view.selections[topic] ?? []).includes(tweetId);
  }

  async refresh(): Promise<void> {
    this.view = await this.client.getSession(this.view.session_id);
    this.render();
  }

  private el<K extends keyof HTMLElementTagNameMap>(
    tag: K, className?: string, text?: string): HTMLElementTagNameMap[K] {
    const node = this.doc.createElement(tag);
    if (className) node.className = className;
    if (text !== undefined) node.textContent = text;
    return node;
  }

  private showError(message: string, retry?: () => void) {
    const banner = this.root.querySelector(".error-banner") as HTMLElement;
    banner.hidden = false;
    banner.textContent = "";
    banner.append(this.el("span", "error-message", message));
    if (retry) {
      const button = this.el("button", "retry", "Retry");
      button.addEventListener("click", () => {
        banner.hidden = true;
        retry();
      });
      banner.append(button);
    }
  }

  private clearError() {
    const banner = this.root.querySelector(".error-banner") as HTMLElement;
    banner.hidden = true;
    banner.textContent = "";
  }

  async toggle(topic: string, tweetId: string): Promise<void> {
    const before = this.view;
    const selecting = !this.isSelected(topic, tweetId);
    // optimistic local flip; never shown over budget, the server still
    // decides and its rejection text is surfaced verbatim
    if (!(selecting && before.remaining === 0)) {
      const selections = { ...before.selections };
      const bucket = [...(selections[topic] ?? [])];
      const order = [...before.order];
      if (selecting) {
        bucket.push(tweetId);
        order.push([topic, tweetId]);
      } else {
        bucket.splice(bucket.indexOf(tweetId), 1);
        const at = order.findIndex(([t, id]) => t === topic && id === tweetId);
        if (at >= 0) order.splice(at, 1);
      }
      selections[topic] = bucket;
      this.view = { ...before, selections, order,
                    remaining: before.budget - order.length };
      this.render();
    }

    try {
      this.view = await this.client.toggle(before.session_id, topic, tweetId);
      this.clearError();
      this.render();
    } catch (err) {
      this.view = before; // rollback
      this.render();
      if (err instanceof ApiError) {
        this.showError(err.message); // 409 text surfaced verbatim
      } else {
        this.showError("network failure: could not reach the service",
                       () => void this.toggle(topic, tweetId));
      }
    }
  }

  async finalize(): Promise<void> {
    try {
      const result = await this.client.finalize(this.view.session_id);
      await this.refresh();
      this.callbacks.onFinalized?.(result.record);
    } catch (err) {
      if (err instanceof ApiError) {
        this.showError(err.message);
      } else {
        this.showError("network failure: could not reach the service",
                       () => void this.finalize());
      }
    }
  }

  render(): void {
    const v = this.view;
    this.root.textContent = "";

    const phase = v.state === "Finalized" ? "Rating" : v.mode;
    const banner = this.el("div", "mode-banner", `Mode: ${phase}`);
    banner.dataset.mode = phase;
    this.root.append(banner);

    const error = this.el("div", "error-banner");
    error.hidden = true;
    this.root.append(error);

    this.root.append(this.renderGuidelines());

    const basket = this.el("div", "basket");
    basket.append(this.el("span", "basket-count",
                          `Selected ${this.selectedCount()} of ${v.budget}`));
    basket.append(this.el("span", "basket-remaining",
                          `${v.remaining} remaining`));
    this.root.append(basket);

    const tabs = this.el("nav", "topic-tabs");
    for (const topic of Object.keys(v.candidates)) {
      const count = (v.selections[topic] ?? []).length;
      const tab = this.el("button", "topic-tab",
                          count > 0 ? `${topic} (${count})` : topic);
      tab.dataset.topic = topic;
      if (topic === this.activeTopic) tab.classList.add("active");
      tab.addEventListener("click", () => {
        this.activeTopic = topic;
        this.render();
      });
      tabs.append(tab);
    }
    this.root.append(tabs);

    this.root.append(this.renderCandidates());

    const finalize = this.el("button", "finalize", "Finalize summary");
    const short = v.budget - this.selectedCount();
    const finalizable = v.state === "Open" &&
      (v.mode === "GroundTruth" ? short === 0 : this.selectedCount() > 0);
    finalize.disabled = !finalizable;
    if (v.state === "Finalized") {
      finalize.title = "already finalized";
    } else if (!finalizable) {
      finalize.title = `${short} below budget`;
    }
    finalize.addEventListener("click", () => void this.finalize());
    this.root.append(finalize);
  }

  private renderGuidelines(): HTMLElement {
    const panel = this.el("details", "guidelines") as HTMLDetailsElement;
    panel.open = this.firstOpen();
    panel.append(this.el("summary", "", "Annotation guidelines"));
    const steps = this.el("ol", "instructions");
    for (const line of INSTRUCTIONS) steps.append(this.el("li", "", line));
    panel.append(steps);
    const topics = this.el("dl", "topic-descriptions");
    for (const [topic, description] of Object.entries(TOPIC_DESCRIPTIONS)) {
      if (!(topic in this.view.candidates)) continue;
      topics.append(this.el("dt", "", topic));
      topics.append(this.el("dd", "", description));
    }
    panel.append(topics);
    return panel;
  }

  private firstOpen(): boolean {
    const key = `crisissumm-guidelines-seen:${this.view.session_id}`;
    try {
      const win = this.doc.defaultView;
      if (!win?.localStorage) return true;
      const seen = win.localStorage.getItem(key) !== null;
      win.localStorage.setItem(key, "1");
      return !seen;
    } catch {
      return true;
    }
  }

  private renderCandidates(): HTMLElement {
    const v = this.view;
    const list = this.el("ul", "candidates");
    const locked = v.state === "Finalized";
    // server payload order is authoritative: never re-sort, never number
    for (const tweetId of v.candidates[this.activeTopic] ?? []) {
      const item = this.el("li", "candidate");
      item.dataset.id = tweetId;
      const label = this.el("label");
      const box = this.el("input") as HTMLInputElement;
      box.type = "checkbox";
      box.checked = this.isSelected(this.activeTopic, tweetId);
      box.disabled = locked;
      box.addEventListener("change", () => {
        void this.toggle(this.activeTopic, tweetId);
      });
      label.append(box);
      label.append(this.el("span", "tweet-text", v.texts[tweetId] ?? tweetId));
      item.append(label);
      list.append(item);
    }
    return list;
  }
}
