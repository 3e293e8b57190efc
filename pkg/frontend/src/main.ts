import { ApiClient } from "./api";
import { App } from "./app";

const DEFAULT_BASE = "http://127.0.0.1:8000";

function baseUrl(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("api") ?? DEFAULT_BASE;
}

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) {
    return;
  }
  root.innerHTML = `
    <div class="uploader">
      <h1>clusterscout</h1>
      <p>Pick a CSV file to start a session.</p>
      <input type="file" id="csv-input" accept=".csv,text/csv" />
      <p id="upload-error" class="error" hidden></p>
    </div>`;
  const input = root.querySelector<HTMLInputElement>("#csv-input")!;
  const errorBox = root.querySelector<HTMLElement>("#upload-error")!;
  input.addEventListener("change", async () => {
    const file = input.files?.[0];
    if (!file) {
      return;
    }
    try {
      const text = await file.text();
      const api = new ApiClient(baseUrl());
      await App.open(root, api, text);
    } catch (err) {
      errorBox.hidden = false;
      errorBox.textContent = err instanceof Error ? err.message : String(err);
    }
  });
}

void boot();
