import { createApp } from "./app.js";

function boot(): void {
  const root = document.getElementById("app");
  if (root) createApp(root);
}

if (document.readyState === "loading") {
  document.addEventListener("DOMContentLoaded", boot);
} else {
  boot();
}
