setTimeout(function () {
  var slot = document.getElementById("gAd2");
  if (!slot || slot.clientHeight === 0) {
    var note = document.createElement("div");
    note.textContent = "ads keep us alive";
    document.body.appendChild(note);
  }
}, 2000);
